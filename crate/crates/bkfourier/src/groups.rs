//! Point models for SL2, PGL2 and GL2 over `F_q`, their compactifying
//! quotient stacks, and the associated torus stacks.
//!
//! A presentation point is a triple `(x, alpha, b)` with `x` a 2x2 matrix,
//! `det x = alpha^2` and `b` a scalar; groups arise as the open locus where
//! everything is invertible, stacks by dropping invertibility.  The
//! square-root coordinate `alpha` lives on one of two Frobenius twists of a
//! line: the plain line `F_q` or the twisted line `{a : a^q = -a}`.  A
//! twisted value is stored by its coefficient against a fixed square root of
//! the least non-square `r`, so `alpha^2 = r * coef^2` there; products of two
//! twisted values land back on the plain line.

use crate::algebra::{Fe, FieldCtx};
use crate::groupoid::{Action, Groupoid, GroupoidError};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sector {
    Plain,
    Twisted,
}

/// A point of the plain or twisted line.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LineElt {
    pub sector: Sector,
    pub coef: Fe,
}

impl LineElt {
    pub fn plain(c: Fe) -> LineElt {
        LineElt {
            sector: Sector::Plain,
            coef: c,
        }
    }

    pub fn twisted(c: Fe) -> LineElt {
        LineElt {
            sector: Sector::Twisted,
            coef: c,
        }
    }

    /// `alpha^2`, always on the plain line.
    pub fn square(&self, ctx: &FieldCtx) -> Fe {
        let c2 = ctx.mul(self.coef, self.coef);
        match self.sector {
            Sector::Plain => c2,
            Sector::Twisted => ctx.mul(ctx.least_nonsquare(), c2),
        }
    }

    pub fn mul(ctx: &FieldCtx, a: LineElt, b: LineElt) -> LineElt {
        let c = ctx.mul(a.coef, b.coef);
        match (a.sector, b.sector) {
            (Sector::Plain, Sector::Plain) => LineElt::plain(c),
            (Sector::Plain, Sector::Twisted) | (Sector::Twisted, Sector::Plain) => {
                LineElt::twisted(c)
            }
            (Sector::Twisted, Sector::Twisted) => {
                LineElt::plain(ctx.mul(ctx.least_nonsquare(), c))
            }
        }
    }

    /// Scaling by a plain field element.
    pub fn scale(&self, ctx: &FieldCtx, s: Fe) -> LineElt {
        LineElt {
            sector: self.sector,
            coef: ctx.mul(s, self.coef),
        }
    }

    pub fn neg(&self, ctx: &FieldCtx) -> LineElt {
        LineElt {
            sector: self.sector,
            coef: ctx.neg(self.coef),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coef.0 == 0
    }

    pub fn render(&self, ctx: &FieldCtx) -> String {
        match self.sector {
            Sector::Plain => ctx.fe_str(self.coef),
            Sector::Twisted => format!("{}t", ctx.fe_str(self.coef)),
        }
    }
}

/// Row-major 2x2 matrix over `F_q`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mat2 {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub d: Fe,
}

impl Mat2 {
    pub fn new(a: Fe, b: Fe, c: Fe, d: Fe) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn diag(d1: Fe, d2: Fe) -> Mat2 {
        Mat2::new(d1, Fe(0), Fe(0), d2)
    }

    pub fn zero() -> Mat2 {
        Mat2::diag(Fe(0), Fe(0))
    }

    pub fn ident() -> Mat2 {
        Mat2::diag(Fe(1), Fe(1))
    }

    pub fn mul(ctx: &FieldCtx, x: Mat2, y: Mat2) -> Mat2 {
        Mat2 {
            a: ctx.add(ctx.mul(x.a, y.a), ctx.mul(x.b, y.c)),
            b: ctx.add(ctx.mul(x.a, y.b), ctx.mul(x.b, y.d)),
            c: ctx.add(ctx.mul(x.c, y.a), ctx.mul(x.d, y.c)),
            d: ctx.add(ctx.mul(x.c, y.b), ctx.mul(x.d, y.d)),
        }
    }

    pub fn scale(&self, ctx: &FieldCtx, s: Fe) -> Mat2 {
        Mat2 {
            a: ctx.mul(s, self.a),
            b: ctx.mul(s, self.b),
            c: ctx.mul(s, self.c),
            d: ctx.mul(s, self.d),
        }
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Mat2 {
        self.scale(ctx, ctx.from_int(-1))
    }

    pub fn trace(&self, ctx: &FieldCtx) -> Fe {
        ctx.add(self.a, self.d)
    }

    pub fn det(&self, ctx: &FieldCtx) -> Fe {
        ctx.sub(ctx.mul(self.a, self.d), ctx.mul(self.b, self.c))
    }

    pub fn is_diag(&self) -> bool {
        self.b.0 == 0 && self.c.0 == 0
    }

    /// The adjugate `(d, -b; -c, a)`; an anti-homomorphism with
    /// `x * adj(x) = det(x) * I`.
    pub fn adj(&self, ctx: &FieldCtx) -> Mat2 {
        Mat2 {
            a: self.d,
            b: ctx.neg(self.b),
            c: ctx.neg(self.c),
            d: self.a,
        }
    }
}

/// Presentation point `(x, alpha, b)` with `det x = alpha^2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StackPoint {
    pub x: Mat2,
    pub alpha: LineElt,
    pub b: Fe,
}

impl StackPoint {
    pub fn render(&self, ctx: &FieldCtx) -> String {
        format!(
            "({},{},{},{};{};{})",
            ctx.fe_str(self.x.a),
            ctx.fe_str(self.x.b),
            ctx.fe_str(self.x.c),
            ctx.fe_str(self.x.d),
            self.alpha.render(ctx),
            ctx.fe_str(self.b)
        )
    }
}

/// Componentwise product; the monoid structure every kernel pulls back along.
pub fn mult_stack(ctx: &FieldCtx, u: &StackPoint, v: &StackPoint) -> StackPoint {
    StackPoint {
        x: Mat2::mul(ctx, u.x, v.x),
        alpha: LineElt::mul(ctx, u.alpha, v.alpha),
        b: ctx.mul(u.b, v.b),
    }
}

/// Point of the three-torus quotient `[(a, b, c)/H]`; the `c` coordinate
/// carries the twisted sector where the acting group has a `mu_2` component.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct T3Point {
    pub a: Fe,
    pub b: Fe,
    pub c: LineElt,
}

impl T3Point {
    pub fn render(&self, ctx: &FieldCtx) -> String {
        format!(
            "({};{};{})",
            ctx.fe_str(self.a),
            ctx.fe_str(self.b),
            self.c.render(ctx)
        )
    }
}

pub fn mult_t3(ctx: &FieldCtx, u: &T3Point, v: &T3Point) -> T3Point {
    T3Point {
        a: ctx.mul(u.a, v.a),
        b: ctx.mul(u.b, v.b),
        c: LineElt::mul(ctx, u.c, v.c),
    }
}

/// Characteristic-2 presentation point `(x', b)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Char2Point {
    pub x: Mat2,
    pub b: Fe,
}

impl Char2Point {
    pub fn render(&self, ctx: &FieldCtx) -> String {
        format!(
            "({},{},{},{};{})",
            ctx.fe_str(self.x.a),
            ctx.fe_str(self.x.b),
            ctx.fe_str(self.x.c),
            ctx.fe_str(self.x.d),
            ctx.fe_str(self.b)
        )
    }
}

pub fn mult_char2(ctx: &FieldCtx, u: &Char2Point, v: &Char2Point) -> Char2Point {
    Char2Point {
        x: Mat2::mul(ctx, u.x, v.x),
        b: ctx.mul(u.b, v.b),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupKind {
    Sl2,
    Pgl2,
    Gl2,
}

/// One element of the acting group, shared across all presentations:
/// `x`-type coordinates scale by `s` (with sign `eps` on `alpha`), the
/// `b`-type coordinate scales by `t`.
#[derive(Clone, Copy, Debug)]
pub struct HElem {
    pub s: Fe,
    pub t: Fe,
    pub eps: bool,
}

fn act_stack(ctx: &FieldCtx, h: &HElem, p: &StackPoint) -> StackPoint {
    let mut alpha = p.alpha.scale(ctx, h.s);
    if h.eps {
        alpha = alpha.neg(ctx);
    }
    StackPoint {
        x: p.x.scale(ctx, h.s),
        alpha,
        b: ctx.mul(h.t, p.b),
    }
}

fn act_t3(ctx: &FieldCtx, h: &HElem, p: &T3Point) -> T3Point {
    let mut c = p.c.scale(ctx, h.s);
    if h.eps {
        c = c.neg(ctx);
    }
    T3Point {
        a: ctx.mul(h.s, p.a),
        b: ctx.mul(h.t, p.b),
        c,
    }
}

/// Acting groups: SL2 `(s, t)`, PGL2 `(s, t, eps)`, GL2 `(t, t^{-1}, eps)`.
pub fn stack_h_elems(kind: GroupKind, ctx: &FieldCtx) -> Vec<HElem> {
    let mut out = vec![];
    match kind {
        GroupKind::Sl2 => {
            for s in ctx.units() {
                for t in ctx.units() {
                    out.push(HElem { s, t, eps: false });
                }
            }
        }
        GroupKind::Pgl2 => {
            for s in ctx.units() {
                for t in ctx.units() {
                    for eps in [false, true] {
                        out.push(HElem { s, t, eps });
                    }
                }
            }
        }
        GroupKind::Gl2 => {
            for t in ctx.units() {
                for eps in [false, true] {
                    out.push(HElem {
                        s: t,
                        t: ctx.inv(t),
                        eps,
                    });
                }
            }
        }
    }
    out
}

/// Torus-quotient acting groups: SL2 `(s, t)`, PGL2 `(s, t, eps)`,
/// GL2 `(s, s^{-2}, eps)`.
pub fn t3_h_elems(kind: GroupKind, ctx: &FieldCtx) -> Vec<HElem> {
    match kind {
        GroupKind::Sl2 | GroupKind::Pgl2 => stack_h_elems(kind, ctx),
        GroupKind::Gl2 => {
            let mut out = vec![];
            for s in ctx.units() {
                let s2inv = ctx.inv(ctx.mul(s, s));
                for eps in [false, true] {
                    out.push(HElem { s, t: s2inv, eps });
                }
            }
            out
        }
    }
}

fn has_twisted_sector(kind: GroupKind) -> bool {
    !matches!(kind, GroupKind::Sl2)
}

/// All `alpha` on the available sectors with `alpha^2 = d`.
fn line_roots(ctx: &FieldCtx, kind: GroupKind, d: Fe) -> Vec<LineElt> {
    let mut out = vec![];
    if let Some(s) = ctx.sqrt(d) {
        out.push(LineElt::plain(s));
        if s.0 != 0 {
            out.push(LineElt::plain(ctx.neg(s)));
        }
    }
    if has_twisted_sector(kind) {
        let dr = ctx.mul(d, ctx.inv(ctx.least_nonsquare()));
        if let Some(c) = ctx.sqrt(dr) {
            out.push(LineElt::twisted(c));
            if c.0 != 0 {
                out.push(LineElt::twisted(ctx.neg(c)));
            }
        }
    }
    out
}

fn all_mats(ctx: &FieldCtx) -> impl Iterator<Item = Mat2> + '_ {
    ctx.elements().flat_map(move |a| {
        ctx.elements().flat_map(move |b| {
            ctx.elements()
                .flat_map(move |c| ctx.elements().map(move |d| Mat2::new(a, b, c, d)))
        })
    })
}

/// Points of the compactifying stack: every `(x, alpha, b)` with
/// `det x = alpha^2`, `x` and `b` not required invertible.
pub fn stack_points(kind: GroupKind, ctx: &FieldCtx) -> Vec<StackPoint> {
    let mut out = vec![];
    for x in all_mats(ctx) {
        for alpha in line_roots(ctx, kind, x.det(ctx)) {
            for b in ctx.elements() {
                out.push(StackPoint { x, alpha, b });
            }
        }
    }
    out
}

/// Points of the group presentation: the open locus of the stack.
pub fn group_points(kind: GroupKind, ctx: &FieldCtx) -> Vec<StackPoint> {
    stack_points(kind, ctx)
        .into_iter()
        .filter(|p| match kind {
            // For SL2 and PGL2 the group sits at b = 1 inside the
            // two-parameter presentation; quotient by (s, t) with t acting
            // on b alone would be redundant, so fix b and restrict H later.
            GroupKind::Sl2 | GroupKind::Pgl2 => !p.alpha.is_zero() && p.b == Fe(1),
            GroupKind::Gl2 => !p.alpha.is_zero() && p.b.0 != 0,
        })
        .collect()
}

/// Acting group for [`group_points`]: the `b`-scaling leg is dropped for
/// SL2/PGL2 (their group presentation has no `b` coordinate).
pub fn group_h_elems(kind: GroupKind, ctx: &FieldCtx) -> Vec<HElem> {
    match kind {
        GroupKind::Sl2 => ctx
            .units()
            .map(|s| HElem {
                s,
                t: Fe(1),
                eps: false,
            })
            .collect(),
        GroupKind::Pgl2 => ctx
            .units()
            .flat_map(|s| {
                [false, true].map(|eps| HElem {
                    s,
                    t: Fe(1),
                    eps,
                })
            })
            .collect(),
        GroupKind::Gl2 => stack_h_elems(GroupKind::Gl2, ctx),
    }
}

pub fn stack_groupoid(
    kind: GroupKind,
    ctx: &FieldCtx,
) -> Result<Groupoid<StackPoint>, GroupoidError> {
    let pts = stack_points(kind, ctx);
    let hs = stack_h_elems(kind, ctx);
    let action = Action::new(
        pts,
        hs.len(),
        |h, p| act_stack(ctx, &hs[h], p),
        |p| p.alpha.sector as u8,
    )?;
    Groupoid::new(action)
}

pub fn group_groupoid(
    kind: GroupKind,
    ctx: &FieldCtx,
) -> Result<Groupoid<StackPoint>, GroupoidError> {
    let pts = group_points(kind, ctx);
    let hs = group_h_elems(kind, ctx);
    let action = Action::new(
        pts,
        hs.len(),
        |h, p| act_stack(ctx, &hs[h], p),
        |p| p.alpha.sector as u8,
    )?;
    Groupoid::new(action)
}

/// The diagonal-matrix substack `[T-bar / H]` of the compactifying stack.
pub fn torus_stack_groupoid(
    kind: GroupKind,
    ctx: &FieldCtx,
) -> Result<Groupoid<StackPoint>, GroupoidError> {
    let pts: Vec<StackPoint> = stack_points(kind, ctx)
        .into_iter()
        .filter(|p| p.x.is_diag())
        .collect();
    let hs = stack_h_elems(kind, ctx);
    let action = Action::new(
        pts,
        hs.len(),
        |h, p| act_stack(ctx, &hs[h], p),
        |p| p.alpha.sector as u8,
    )?;
    Groupoid::new(action)
}

pub fn t3_points(kind: GroupKind, ctx: &FieldCtx) -> Vec<T3Point> {
    let mut out = vec![];
    for a in ctx.elements() {
        for b in ctx.elements() {
            for coef in ctx.elements() {
                out.push(T3Point {
                    a,
                    b,
                    c: LineElt::plain(coef),
                });
                if has_twisted_sector(kind) {
                    out.push(T3Point {
                        a,
                        b,
                        c: LineElt::twisted(coef),
                    });
                }
            }
        }
    }
    out
}

pub fn t3_groupoid(kind: GroupKind, ctx: &FieldCtx) -> Result<Groupoid<T3Point>, GroupoidError> {
    let pts = t3_points(kind, ctx);
    let hs = t3_h_elems(kind, ctx);
    let action = Action::new(
        pts,
        hs.len(),
        |h, p| act_t3(ctx, &hs[h], p),
        |p| p.c.sector as u8,
    )?;
    Groupoid::new(action)
}

/// Characteristic-2 stack `[(gl_2 x gl_1)/GL_1]` with `s.(x, b) = (sx, s^{-2}b)`.
pub fn char2_points(ctx: &FieldCtx) -> Vec<Char2Point> {
    let mut out = vec![];
    for x in all_mats(ctx) {
        for b in ctx.elements() {
            out.push(Char2Point { x, b });
        }
    }
    out
}

pub fn char2_h_elems(ctx: &FieldCtx) -> Vec<HElem> {
    ctx.units()
        .map(|s| HElem {
            s,
            t: ctx.inv(ctx.mul(s, s)),
            eps: false,
        })
        .collect()
}

fn act_char2(ctx: &FieldCtx, h: &HElem, p: &Char2Point) -> Char2Point {
    Char2Point {
        x: p.x.scale(ctx, h.s),
        b: ctx.mul(h.t, p.b),
    }
}

pub fn char2_groupoid(
    ctx: &FieldCtx,
    group_only: bool,
) -> Result<Groupoid<Char2Point>, GroupoidError> {
    let pts: Vec<Char2Point> = char2_points(ctx)
        .into_iter()
        .filter(|p| !group_only || (p.x.det(ctx).0 != 0 && p.b.0 != 0))
        .collect();
    let hs = char2_h_elems(ctx);
    let action = Action::new(pts, hs.len(), |h, p| act_char2(ctx, &hs[h], p), |_| 0)?;
    Groupoid::new(action)
}

/// Embedding of the group presentation into the stack at `b = 1` (a no-op on
/// GL2 coordinates, where the group presentation already carries `b`).
pub fn embed(kind: GroupKind, p: &StackPoint) -> StackPoint {
    match kind {
        GroupKind::Sl2 | GroupKind::Pgl2 => StackPoint { b: Fe(1), ..*p },
        GroupKind::Gl2 => *p,
    }
}

/// Whether a stack point lies on the open locus the group embeds onto.
pub fn in_open_locus(kind: GroupKind, ctx: &FieldCtx, p: &StackPoint) -> bool {
    match kind {
        GroupKind::Sl2 | GroupKind::Pgl2 => p.x.det(ctx).0 != 0 && p.b.0 != 0,
        GroupKind::Gl2 => !p.alpha.is_zero() && p.b.0 != 0,
    }
}

/// `[a, b, c] -> [(a^2, c^2), ac, b]`, from the three-torus quotient to the
/// diagonal substack.
pub fn tilde_rho(ctx: &FieldCtx, p: &T3Point) -> StackPoint {
    StackPoint {
        x: Mat2::diag(ctx.mul(p.a, p.a), p.c.square(ctx)),
        alpha: p.c.scale(ctx, p.a),
        b: p.b,
    }
}

/// Jordan-type classification of a 2x2 matrix over `F_q` (odd `q`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MatKind {
    /// `lambda * I`, including 0.
    Central(Fe),
    /// Conjugate to a Jordan block with eigenvalue `lambda` (possibly 0).
    NonSemisimple(Fe),
    /// Distinct eigenvalues in `F_q` (one may be 0).
    SplitRegular(Fe, Fe),
    /// Irreducible characteristic polynomial.
    NonSplit,
}

pub fn classify_mat(ctx: &FieldCtx, x: &Mat2) -> MatKind {
    assert!(ctx.p != 2, "Jordan classification by discriminant needs odd q");
    let tr = x.trace(ctx);
    let det = x.det(ctx);
    let disc = ctx.sub(ctx.mul(tr, tr), ctx.mul(ctx.from_int(4), det));
    if disc.0 == 0 {
        let lambda = ctx.mul(tr, ctx.inv(ctx.from_int(2)));
        if *x == Mat2::diag(lambda, lambda) {
            MatKind::Central(lambda)
        } else {
            MatKind::NonSemisimple(lambda)
        }
    } else {
        match ctx.sqrt(disc) {
            Some(s) => {
                let half = ctx.inv(ctx.from_int(2));
                let d1 = ctx.mul(ctx.add(tr, s), half);
                let d2 = ctx.mul(ctx.sub(tr, s), half);
                MatKind::SplitRegular(d1, d2)
            }
            None => MatKind::NonSplit,
        }
    }
}

pub fn order_gl2(q: u64) -> u64 {
    (q * q - 1) * (q * q - q)
}

pub fn order_sl2(q: u64) -> u64 {
    q * (q * q - 1)
}
