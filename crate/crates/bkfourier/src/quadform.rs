//! Fourier transform on the isotropic cone of a quadratic space.
//!
//! The split odd form in dimension `2m + 1` is
//! `Q(v) = v_0 v_{2m} + ... + v_{m-1} v_{m+1} + c v_m^2`; its projectivised
//! zero locus carries the kernel `K([v'], [v]) = sigma(B(v', v))` with `B`
//! the polarisation of `Q`, and the transform squares to `q^{2m}` exactly.
//! The even-dimensional hyperbolic form is included as a negative control:
//! there the same kernel is not involutive at any scale.
//!
//! A second model of the same theorem lives on the quadric
//! `det x = alpha^2` inside 2x2 matrices plus a line: the multiplication
//! kernel of the SL2 story, the adjugate-twisted kernel, and the raw cone
//! kernel are interchanged by linear automorphisms of the quadric, and all
//! three square to `q^4`.

use crate::algebra::{Fe, FieldCtx};
use crate::groupoid::{slots_from_int, slots_zero, Action, Groupoid, GroupoidError, Slots};
use crate::groups::Mat2;
use crate::kernels::{gauss_slots, sigma};

/// Fixed-width vector; coordinates past the ambient dimension stay zero.
pub const QMAX: usize = 6;
pub type QVec = [Fe; QMAX];

#[derive(Clone, Copy, Debug)]
pub struct QuadSpace {
    /// Ambient dimension.
    pub n: usize,
    /// Number of hyperbolic pairs.
    pub m: usize,
    /// Middle coefficient of the odd form; unused in the even one.
    pub c: Fe,
    pub odd: bool,
}

impl QuadSpace {
    /// `Q = sum_{i<m} v_i v_{2m-i} + c v_m^2` in dimension `2m + 1`.
    pub fn split_odd(m: usize, c: Fe) -> QuadSpace {
        assert!(2 * m + 1 <= QMAX && c.0 != 0);
        QuadSpace {
            n: 2 * m + 1,
            m,
            c,
            odd: true,
        }
    }

    /// `Q = sum_{i<=m} v_i v_{2m+1-i}` in dimension `2m + 2`.
    pub fn hyperbolic_even(m: usize) -> QuadSpace {
        assert!(2 * m + 2 <= QMAX);
        QuadSpace {
            n: 2 * m + 2,
            m,
            c: Fe(1),
            odd: false,
        }
    }

    pub fn q_val(&self, ctx: &FieldCtx, v: &QVec) -> Fe {
        let mut acc = Fe(0);
        if self.odd {
            for i in 0..self.m {
                acc = ctx.add(acc, ctx.mul(v[i], v[2 * self.m - i]));
            }
            acc = ctx.add(acc, ctx.mul(self.c, ctx.mul(v[self.m], v[self.m])));
        } else {
            for i in 0..=self.m {
                acc = ctx.add(acc, ctx.mul(v[i], v[2 * self.m + 1 - i]));
            }
        }
        acc
    }

    /// `B(u, v) = Q(u + v) - Q(u) - Q(v)`.
    pub fn b_val(&self, ctx: &FieldCtx, u: &QVec, v: &QVec) -> Fe {
        let mut sum = [Fe(0); QMAX];
        for i in 0..self.n {
            sum[i] = ctx.add(u[i], v[i]);
        }
        ctx.sub(
            ctx.sub(self.q_val(ctx, &sum), self.q_val(ctx, u)),
            self.q_val(ctx, v),
        )
    }

    pub fn vectors(&self, ctx: &FieldCtx) -> Vec<QVec> {
        let mut out = vec![[Fe(0); QMAX]];
        for i in 0..self.n {
            let mut next = vec![];
            for v in &out {
                for e in ctx.elements() {
                    let mut w = *v;
                    w[i] = e;
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    pub fn cone(&self, ctx: &FieldCtx) -> Vec<QVec> {
        self.vectors(ctx)
            .into_iter()
            .filter(|v| self.q_val(ctx, v).0 == 0)
            .collect()
    }

    /// The projectivised cone `[{Q = 0}/F_q^x]` as a groupoid.
    pub fn cone_groupoid(&self, ctx: &FieldCtx) -> Result<Groupoid<QVec>, GroupoidError> {
        let pts = self.cone(ctx);
        let units: Vec<Fe> = ctx.units().collect();
        let action = Action::new(
            pts,
            units.len(),
            |h, v| {
                let mut w = *v;
                for x in w.iter_mut() {
                    *x = ctx.mul(units[h], *x);
                }
                w
            },
            |_| 0,
        )?;
        Groupoid::new(action)
    }

    pub fn render(&self, ctx: &FieldCtx, v: &QVec) -> String {
        let coords: Vec<String> = v[..self.n].iter().map(|&x| ctx.fe_str(x)).collect();
        format!("({})", coords.join(","))
    }

    /// `sum_{Q(v) = 0} psi(B(v', v))`, by brute enumeration.
    pub fn f_brute(&self, ctx: &FieldCtx, cone: &[QVec], vp: &QVec) -> Slots {
        let mut acc = slots_zero(ctx.p);
        for v in cone {
            let e = ctx.psi_exp(self.b_val(ctx, vp, v));
            crate::groupoid::slots_add_zeta(&mut acc, ctx.p, e, 1);
        }
        acc
    }

    /// Closed form of [`Self::f_brute`] for the split odd space:
    /// `q^{2m}` at `v' = 0`, else `q^m alpha0(c) alpha0(Q(v'))`.
    pub fn f_closed(&self, ctx: &FieldCtx, vp: &QVec) -> Slots {
        assert!(self.odd);
        if vp[..self.n].iter().all(|x| x.0 == 0) {
            return slots_from_int(ctx.p, (ctx.q as i64).pow(2 * self.m as u32));
        }
        let qm = (ctx.q as i64).pow(self.m as u32);
        let val = qm * ctx.alpha0(self.c) * ctx.alpha0(self.q_val(ctx, vp));
        slots_from_int(ctx.p, val)
    }
}

/// The cone kernel `sigma(B(u, v))` in slot form.
pub fn cone_kernel<'a>(
    space: &'a QuadSpace,
    ctx: &'a FieldCtx,
) -> impl Fn(&QVec, &QVec) -> Slots + Sync + 'a {
    move |u, v| slots_from_int(ctx.p, sigma(ctx, space.b_val(ctx, u, v)))
}

/// Weil sum `sum_v psi(lambda Q(v))` over the whole space; for the split
/// odd form this is `q^m alpha0(c lambda) S` for every unit `lambda`.
pub fn weil_sum(space: &QuadSpace, ctx: &FieldCtx, lambda: Fe) -> Slots {
    let mut acc = slots_zero(ctx.p);
    for v in space.vectors(ctx) {
        let e = ctx.psi_exp(ctx.mul(lambda, space.q_val(ctx, &v)));
        crate::groupoid::slots_add_zeta(&mut acc, ctx.p, e, 1);
    }
    acc
}

pub fn weil_closed(space: &QuadSpace, ctx: &FieldCtx, lambda: Fe) -> Slots {
    assert!(space.odd && lambda.0 != 0);
    let qm = (ctx.q as i64).pow(space.m as u32);
    let mut s = gauss_slots(ctx);
    let coef = qm * ctx.alpha0(ctx.mul(space.c, lambda));
    for x in s.iter_mut() {
        *x *= coef;
    }
    s
}

/// Quadric model on 2x2 matrices: points `(x, alpha)` with
/// `det x = alpha^2`, scaled diagonally by units.
pub type ConePt = (Mat2, Fe);

pub fn quadric_points(ctx: &FieldCtx) -> Vec<ConePt> {
    let mut out = vec![];
    for a in ctx.elements() {
        for b in ctx.elements() {
            for c in ctx.elements() {
                for d in ctx.elements() {
                    let x = Mat2::new(a, b, c, d);
                    let det = x.det(ctx);
                    if let Some(s) = ctx.sqrt(det) {
                        out.push((x, s));
                        if s.0 != 0 {
                            out.push((x, ctx.neg(s)));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn quadric_groupoid(ctx: &FieldCtx) -> Result<Groupoid<ConePt>, GroupoidError> {
    let pts = quadric_points(ctx);
    let units: Vec<Fe> = ctx.units().collect();
    let action = Action::new(
        pts,
        units.len(),
        |h, (x, a)| (x.scale(ctx, units[h]), ctx.mul(units[h], *a)),
        |_| 0,
    )?;
    Groupoid::new(action)
}

/// `sigma(tr x + 2 alpha)`: the one-variable function behind both
/// multiplication-type quadric kernels.
pub fn quadric_phi(ctx: &FieldCtx, x: &Mat2, alpha: Fe) -> i64 {
    sigma(
        ctx,
        ctx.add(x.trace(ctx), ctx.mul(ctx.from_int(2), alpha)),
    )
}

/// Polarisation of `det x - alpha^2`: `tr(adj(y) x) - 2 beta alpha`.
pub fn quadric_b(ctx: &FieldCtx, u: &ConePt, v: &ConePt) -> Fe {
    let tr = Mat2::mul(ctx, u.0.adj(ctx), v.0).trace(ctx);
    ctx.sub(tr, ctx.mul(ctx.from_int(2), ctx.mul(u.1, v.1)))
}

/// The three interchangeable quadric kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadricKernel {
    /// `phi(y x, beta alpha)`.
    Mult,
    /// `phi(adj(y) x, alpha beta)`.
    Hat,
    /// `sigma(B((y, beta), (x, alpha)))`.
    Cone,
}

pub fn quadric_kernel<'a>(
    which: QuadricKernel,
    ctx: &'a FieldCtx,
) -> impl Fn(&ConePt, &ConePt) -> Slots + Sync + 'a {
    move |u, v| {
        let val = match which {
            QuadricKernel::Mult => {
                quadric_phi(ctx, &Mat2::mul(ctx, u.0, v.0), ctx.mul(u.1, v.1))
            }
            QuadricKernel::Hat => {
                quadric_phi(ctx, &Mat2::mul(ctx, u.0.adj(ctx), v.0), ctx.mul(u.1, v.1))
            }
            QuadricKernel::Cone => sigma(ctx, quadric_b(ctx, u, v)),
        };
        slots_from_int(ctx.p, val)
    }
}

pub fn render_cone_pt(ctx: &FieldCtx, p: &ConePt) -> String {
    format!(
        "({},{},{},{};{})",
        ctx.fe_str(p.0.a),
        ctx.fe_str(p.0.b),
        ctx.fe_str(p.0.c),
        ctx.fe_str(p.0.d),
        ctx.fe_str(p.1)
    )
}
