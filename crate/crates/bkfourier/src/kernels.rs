//! Braverman-Kazhdan kernel functions on the group presentations and their
//! compactifying stacks, plus the torus-transform tables.
//!
//! Every kernel value is an exact cyclotomic integer, stored as a slot
//! vector over the basis `zeta^0 .. zeta^{p-2}` (see [`crate::groupoid`]).
//! The two-variable kernels are all of the shape `K(u, v) = phi(m(u, v))`
//! for a one-variable function `phi` and the componentwise product `m`; this
//! module supplies the `phi`'s and the closures gluing them to `m`.
//!
//! On SL2 and PGL2 the kernels are honest class functions.  On GL2 some of
//! the formulas below are pointwise recipes on presentation triples: at the
//! exceptional locus `x = 0, b != 0` the value depends on the chosen
//! representative, which is exactly the obstruction the negative checks
//! exhibit.

use crate::algebra::{Fe, FieldCtx, Fx, QuadExtCtx};
use crate::groupoid::{slots_add_zeta, slots_from_int, slots_zero, Slots};
use crate::groups::{classify_mat, GroupKind, Mat2, MatKind, Sector, StackPoint, T3Point};
use crate::groups::{mult_char2, mult_stack, mult_t3, Char2Point};

/// `sum_{s in F_q^x} psi(s tau)`: `q - 1` at `tau = 0`, else `-1`.
pub fn sigma(ctx: &FieldCtx, tau: Fe) -> i64 {
    ctx.char_sum(tau)
}

fn add_psi(ctx: &FieldCtx, acc: &mut [i64], arg: Fe, c: i64) {
    slots_add_zeta(acc, ctx.p, ctx.psi_exp(arg), c);
}

/// The quadratic Gauss sum `sum_{t in F_q^x} alpha0(t) psi(t)` in slot form.
pub fn gauss_slots(ctx: &FieldCtx) -> Slots {
    let mut acc = slots_zero(ctx.p);
    for t in ctx.units() {
        add_psi(ctx, &mut acc, t, ctx.alpha0(t));
    }
    acc
}

/// `kappa(b) = sum_{s in F_q^x} psi(s^{-2} b)`; equals `q - 1` at `b = 0`.
pub fn kappa_slots(ctx: &FieldCtx, b: Fe) -> Slots {
    let mut acc = slots_zero(ctx.p);
    for s in ctx.units() {
        let s2 = ctx.inv(ctx.mul(s, s));
        add_psi(ctx, &mut acc, ctx.mul(s2, b), 1);
    }
    acc
}

/// `kappa'(b) = kappa(r b)` with `r` the least non-square: the same sum
/// taken over the twisted square classes.
pub fn kappa_prime_slots(ctx: &FieldCtx, b: Fe) -> Slots {
    kappa_slots(ctx, ctx.mul(ctx.least_nonsquare(), b))
}

/// The Kloosterman-type sum `sum_{s in F_q^x} psi(s + c s^{-2})`.
pub fn kloosterman_sq(ctx: &FieldCtx, c: Fe) -> Slots {
    let mut acc = slots_zero(ctx.p);
    for s in ctx.units() {
        let s2 = ctx.inv(ctx.mul(s, s));
        add_psi(ctx, &mut acc, ctx.add(s, ctx.mul(s2, c)), 1);
    }
    acc
}

/// `Phi(tr, alpha, b) = sum_{s in F_q^x} sum_{eps = +-1}
/// psi(s + s^{-2} b (tr + 2 eps alpha))`, the workhorse of every GL2 value.
pub fn phi_big(ctx: &FieldCtx, tr: Fe, alpha: Fe, b: Fe) -> Slots {
    let mut acc = slots_zero(ctx.p);
    let two = ctx.from_int(2);
    for tau in [
        ctx.add(tr, ctx.mul(two, alpha)),
        ctx.sub(tr, ctx.mul(two, alpha)),
    ] {
        let c = ctx.mul(b, tau);
        for s in ctx.units() {
            let s2 = ctx.inv(ctx.mul(s, s));
            add_psi(ctx, &mut acc, ctx.add(s, ctx.mul(s2, c)), 1);
        }
    }
    acc
}

pub(crate) fn slots_sub(a: &mut Slots, b: &Slots) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= *y;
    }
}

pub(crate) fn slots_add(a: &mut Slots, b: &Slots) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y;
    }
}

pub(crate) fn slots_neg(mut a: Slots) -> Slots {
    for x in a.iter_mut() {
        *x = -*x;
    }
    a
}

pub(crate) fn slots_scale(mut a: Slots, c: i64) -> Slots {
    for x in a.iter_mut() {
        *x *= c;
    }
    a
}

fn slots_halve(mut a: Slots) -> Slots {
    for x in a.iter_mut() {
        assert!(*x % 2 == 0, "table value must be 2-divisible");
        *x /= 2;
    }
    a
}

/// One-variable function behind the SL2 stack kernel:
/// `sigma(tr x + 2 alpha) sigma(b)`.
pub fn phi_stack_sl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    debug_assert_eq!(p.alpha.sector, Sector::Plain);
    let tau = ctx.add(p.x.trace(ctx), ctx.mul(ctx.from_int(2), p.alpha.coef));
    slots_from_int(ctx.p, sigma(ctx, tau) * sigma(ctx, p.b))
}

/// PGL2 stack kernel: the two-sheet symmetrisation of the SL2 one on the
/// plain sector, zero on the twisted sector.
pub fn phi_stack_pgl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    if p.alpha.sector == Sector::Twisted {
        return slots_zero(ctx.p);
    }
    let two = ctx.from_int(2);
    let tp = ctx.add(p.x.trace(ctx), ctx.mul(two, p.alpha.coef));
    let tm = ctx.sub(p.x.trace(ctx), ctx.mul(two, p.alpha.coef));
    slots_from_int(ctx.p, (sigma(ctx, tp) + sigma(ctx, tm)) * sigma(ctx, p.b))
}

/// GL2 stack kernel, by Jordan type of the matrix leg.  Pointwise on
/// presentation triples; the `x = 0` branch reads the literal `b`.
pub fn phi_stack_gl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    if p.alpha.sector == Sector::Twisted {
        return slots_zero(ctx.p);
    }
    let q = ctx.q as i64;
    let tr = p.x.trace(ctx);
    let b0 = p.b.0 == 0;
    match classify_mat(ctx, &p.x) {
        MatKind::Central(l) if l.0 != 0 => {
            let mut out = slots_neg(phi_big(ctx, tr, p.alpha.coef, p.b));
            if b0 {
                out[0] -= q;
            } else {
                let lb = ctx.mul(l, p.b);
                slots_sub(&mut out, &slots_scale(gauss_slots(ctx), q * ctx.alpha0(lb)));
            }
            out
        }
        MatKind::Central(_) => {
            // x = 0.
            let mut out = slots_from_int(ctx.p, 2);
            if b0 {
                out[0] -= 2 * q;
            } else {
                slots_sub(
                    &mut out,
                    &slots_scale(gauss_slots(ctx), 2 * q * ctx.alpha0(p.b)),
                );
            }
            out
        }
        MatKind::NonSemisimple(l) if l.0 != 0 => {
            let mut out = slots_neg(phi_big(ctx, tr, p.alpha.coef, p.b));
            if b0 {
                out[0] -= q;
            }
            out
        }
        MatKind::NonSemisimple(_) => {
            // Nilpotent, nonzero.
            slots_from_int(ctx.p, if b0 { 2 - 2 * q } else { 2 })
        }
        MatKind::SplitRegular(..) | MatKind::NonSplit => {
            slots_neg(phi_big(ctx, tr, p.alpha.coef, p.b))
        }
    }
}

pub fn phi_stack(kind: GroupKind, ctx: &FieldCtx, p: &StackPoint) -> Slots {
    match kind {
        GroupKind::Sl2 => phi_stack_sl2(ctx, p),
        GroupKind::Pgl2 => phi_stack_pgl2(ctx, p),
        GroupKind::Gl2 => phi_stack_gl2(ctx, p),
    }
}

/// SL2 group kernel `-sigma(tr x + 2 alpha)`; a class function since
/// scaling by `s` moves `tr x + 2 alpha` to `s (tr x + 2 alpha)`.
pub fn phi_group_sl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    let tau = ctx.add(p.x.trace(ctx), ctx.mul(ctx.from_int(2), p.alpha.coef));
    slots_from_int(ctx.p, -sigma(ctx, tau))
}

pub fn phi_group_pgl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    if p.alpha.sector == Sector::Twisted {
        return slots_zero(ctx.p);
    }
    let two = ctx.from_int(2);
    let tp = ctx.add(p.x.trace(ctx), ctx.mul(two, p.alpha.coef));
    let tm = ctx.sub(p.x.trace(ctx), ctx.mul(two, p.alpha.coef));
    slots_from_int(ctx.p, -(sigma(ctx, tp) + sigma(ctx, tm)))
}

/// GL2 group kernel on presentation triples `(x, alpha, b)`, `alpha b != 0`.
/// Zero when the underlying determinant is a non-square (twisted sector);
/// otherwise `-Phi`, with an extra `-q alpha0(lambda b) S` exactly on the
/// centre.
pub fn phi_group_gl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    if p.alpha.sector == Sector::Twisted {
        return slots_zero(ctx.p);
    }
    let mut out = slots_neg(phi_big(ctx, p.x.trace(ctx), p.alpha.coef, p.b));
    if let MatKind::Central(l) = classify_mat(ctx, &p.x) {
        debug_assert!(l.0 != 0, "group points have invertible x");
        let lb = ctx.mul(l, p.b);
        let q = ctx.q as i64;
        slots_sub(&mut out, &slots_scale(gauss_slots(ctx), q * ctx.alpha0(lb)));
    }
    out
}

pub fn phi_group(kind: GroupKind, ctx: &FieldCtx, p: &StackPoint) -> Slots {
    match kind {
        GroupKind::Sl2 => phi_group_sl2(ctx, p),
        GroupKind::Pgl2 => phi_group_pgl2(ctx, p),
        GroupKind::Gl2 => phi_group_gl2(ctx, p),
    }
}

/// Three-torus kernels.  SL2: `sigma(a + c) sigma(b)`; PGL2 symmetrises
/// over the sign of `c`; GL2 replaces the crude `sigma` by a genuine
/// character sum.  Twisted sectors carry zero.
pub fn phi_t3(kind: GroupKind, ctx: &FieldCtx, p: &T3Point) -> Slots {
    match kind {
        GroupKind::Sl2 => {
            debug_assert_eq!(p.c.sector, Sector::Plain);
            slots_from_int(ctx.p, sigma(ctx, ctx.add(p.a, p.c.coef)) * sigma(ctx, p.b))
        }
        GroupKind::Pgl2 => {
            if p.c.sector == Sector::Twisted {
                return slots_zero(ctx.p);
            }
            let sp = sigma(ctx, ctx.add(p.a, p.c.coef));
            let sm = sigma(ctx, ctx.sub(p.a, p.c.coef));
            slots_from_int(ctx.p, (sp + sm) * sigma(ctx, p.b))
        }
        GroupKind::Gl2 => {
            if p.c.sector == Sector::Twisted {
                return slots_zero(ctx.p);
            }
            let mut acc = slots_zero(ctx.p);
            for tau in [ctx.add(p.a, p.c.coef), ctx.sub(p.a, p.c.coef)] {
                for s in ctx.units() {
                    let s2 = ctx.inv(ctx.mul(s, s));
                    add_psi(ctx, &mut acc, ctx.add(ctx.mul(s, tau), ctx.mul(s2, p.b)), 1);
                }
            }
            acc
        }
    }
}

/// GL2 kernel on the diagonal substack, by the shape of `diag(d1, d2)`.
/// The regular branch is `-Phi` at the literal representative; on the locus
/// `x = 0, b != 0` the recipe depends on the representative.
pub fn phi_torus_gl2(ctx: &FieldCtx, p: &StackPoint) -> Slots {
    assert!(p.x.is_diag(), "diagonal substack only");
    if p.alpha.sector == Sector::Twisted {
        return slots_zero(ctx.p);
    }
    let (d1, d2) = (p.x.a, p.x.d);
    if d1 == d2 {
        if d1.0 == 0 {
            slots_scale(kappa_slots(ctx, p.b), -2)
        } else {
            let lb = ctx.mul(d1, p.b);
            let mut out = slots_neg(kappa_slots(ctx, lb));
            slots_sub(&mut out, &kloosterman_sq(ctx, ctx.mul(ctx.from_int(4), lb)));
            out
        }
    } else {
        slots_neg(phi_big(ctx, p.x.trace(ctx), p.alpha.coef, p.b))
    }
}

/// Frobenius-twisted counterpart of [`phi_torus_gl2`], as a table in the
/// eigenvalue `x1 in F_{q^2}` and the `b` coordinate.  Entries with
/// non-square norm sit on the twisted sector and carry zero.
pub fn phi_torus_sigma_gl2(ctx: &FieldCtx, ext: &QuadExtCtx, x1: Fx, b: Fe) -> Slots {
    if ext.in_base(x1) {
        let v = ext.to_base(x1).expect("checked in_base");
        if v.0 == 0 {
            return slots_scale(kappa_prime_slots(ctx, b), -2);
        }
        let mut out = slots_neg(kloosterman_sq(
            ctx,
            ctx.mul(ctx.from_int(4), ctx.mul(v, b)),
        ));
        let tail = if ctx.is_square(v) {
            kappa_prime_slots(ctx, b)
        } else {
            kappa_slots(ctx, b)
        };
        slots_sub(&mut out, &tail);
        out
    } else {
        let n = ext.norm(x1);
        match ctx.sqrt(n) {
            None => slots_zero(ctx.p),
            Some(alpha) => slots_neg(phi_big(ctx, ext.trace2(x1), alpha, b)),
        }
    }
}

/// Characteristic-2 stack kernel `-sum_s psi(s tr x' + s^{-2} b)`.
pub fn phi_char2_stack(ctx: &FieldCtx, p: &Char2Point) -> Slots {
    let tr = p.x.trace(ctx);
    let mut acc = slots_zero(ctx.p);
    for s in ctx.units() {
        let s2 = ctx.inv(ctx.mul(s, s));
        add_psi(
            ctx,
            &mut acc,
            ctx.add(ctx.mul(s, tr), ctx.mul(s2, p.b)),
            -1,
        );
    }
    acc
}

/// Entrywise Frobenius on 2x2 matrices over a characteristic-2 field;
/// fixed entrywise squaring in the prime field case.
pub fn iota2(ctx: &FieldCtx, x: &Mat2) -> Mat2 {
    Mat2::new(
        ctx.mul(x.a, x.a),
        ctx.mul(x.b, x.b),
        ctx.mul(x.c, x.c),
        ctx.mul(x.d, x.d),
    )
}

/// Characteristic-2 group kernel on invertible `(x', b)`: `-kappa(b)` on
/// trace zero, otherwise the Kloosterman-type sum at `b tr(iota2 x')`.
pub fn phi_char2_group(ctx: &FieldCtx, p: &Char2Point) -> Slots {
    let tr = p.x.trace(ctx);
    if tr.0 == 0 {
        slots_neg(kappa_slots(ctx, p.b))
    } else {
        let trx = iota2(ctx, &p.x).trace(ctx);
        slots_neg(kloosterman_sq(ctx, ctx.mul(p.b, trx)))
    }
}

/// `K(u, v) = phi(m(u, v))` closures for the involutivity engine.
pub fn stack_kernel<'a>(
    kind: GroupKind,
    ctx: &'a FieldCtx,
) -> impl Fn(&StackPoint, &StackPoint) -> Slots + Sync + 'a {
    move |u, v| phi_stack(kind, ctx, &mult_stack(ctx, u, v))
}

pub fn t3_kernel<'a>(
    kind: GroupKind,
    ctx: &'a FieldCtx,
) -> impl Fn(&T3Point, &T3Point) -> Slots + Sync + 'a {
    move |u, v| phi_t3(kind, ctx, &mult_t3(ctx, u, v))
}

pub fn char2_kernel<'a>(
    ctx: &'a FieldCtx,
) -> impl Fn(&Char2Point, &Char2Point) -> Slots + Sync + 'a {
    move |u, v| phi_char2_stack(ctx, &mult_char2(ctx, u, v))
}

pub fn torus_gl2_kernel<'a>(
    ctx: &'a FieldCtx,
) -> impl Fn(&StackPoint, &StackPoint) -> Slots + Sync + 'a {
    move |u, v| phi_torus_gl2(ctx, &mult_stack(ctx, u, v))
}

/// Coordinatewise negation; the involution the squared three-torus
/// transform composes with.
pub fn t3_negate(ctx: &FieldCtx, p: &T3Point) -> T3Point {
    T3Point {
        a: ctx.neg(p.a),
        b: ctx.neg(p.b),
        c: p.c.neg(ctx),
    }
}

/// One comparison row of a torus-transform table: a torus point (rendered
/// key), the closed-form kernel value, and the fiberwise pushforward.
pub struct TorusRow {
    pub key: String,
    pub closed: Slots,
    pub pushed: Slots,
}

fn sl2_t_closed(ctx: &FieldCtx, d: Fe) -> Slots {
    let tau = ctx.add(ctx.add(d, ctx.inv(d)), ctx.from_int(2));
    slots_from_int(ctx.p, -sigma(ctx, tau))
}

fn pgl2_t_closed(ctx: &FieldCtx, w: Fe) -> Slots {
    match ctx.sqrt(w) {
        None => slots_zero(ctx.p),
        Some(v) => {
            let up = ctx.add(ctx.one(), v);
            let um = ctx.sub(ctx.one(), v);
            let val = -(sigma(ctx, ctx.mul(up, up)) + sigma(ctx, ctx.mul(um, um)));
            slots_from_int(ctx.p, val)
        }
    }
}

fn gl2_t_closed(ctx: &FieldCtx, t1: Fe, t2: Fe) -> Slots {
    if t1 == t2 {
        let mut out = slots_neg(kappa_slots(ctx, t1));
        slots_sub(
            &mut out,
            &kloosterman_sq(ctx, ctx.mul(ctx.from_int(4), t1)),
        );
        return out;
    }
    match ctx.sqrt(ctx.div(t2, t1)) {
        None => slots_zero(ctx.p),
        Some(v) => {
            // tr = t1 + t2, alpha = t1 v, so tr +- 2 alpha = t1 (1 +- v)^2.
            slots_neg(phi_big(ctx, ctx.add(t1, t2), ctx.mul(t1, v), ctx.one()))
        }
    }
}

/// All extension units with `a'^2 t = x1` for some base unit `t`; i.e. the
/// decompositions `x1 = a'^2 b` the closed forms are allowed to pick from.
fn sigma_decompositions(ext: &QuadExtCtx, x1: Fx) -> Vec<(Fx, Fe)> {
    let mut out = vec![];
    for a in ext.units() {
        let b = ext.mul(x1, ext.inv(ext.mul(a, a)));
        if let Ok(bb) = ext.to_base(b) {
            if bb.0 != 0 {
                out.push((a, bb));
            }
        }
    }
    out
}

fn gl2_sigma_closed(ctx: &FieldCtx, ext: &QuadExtCtx, t1: Fx) -> Slots {
    let mut value: Option<Slots> = None;
    for (a, b) in sigma_decompositions(ext, t1) {
        let fr = ext.frob(a);
        let four = ctx.from_int(4);
        let val = if ext.in_base(a) {
            let ab = ext.to_base(a).expect("base unit");
            let mut v = slots_neg(kloosterman_sq(
                ctx,
                ctx.mul(four, ctx.mul(ctx.mul(ab, ab), b)),
            ));
            slots_sub(&mut v, &kappa_prime_slots(ctx, b));
            v
        } else if fr == ext.neg(a) {
            let a2 = ext.to_base(ext.mul(a, a)).expect("square of twisted unit");
            let mut v = slots_neg(kloosterman_sq(ctx, ctx.mul(four, ctx.mul(a2, b))));
            slots_sub(&mut v, &kappa_slots(ctx, b));
            v
        } else {
            let sp = ext.add(a, fr);
            let sm = ext.sub(a, fr);
            let cp = ext.to_base(ext.mul(sp, sp)).expect("trace square");
            let cm = ext.to_base(ext.mul(sm, sm)).expect("twisted trace square");
            let mut v = slots_neg(kloosterman_sq(ctx, ctx.mul(cp, b)));
            slots_sub(&mut v, &kloosterman_sq(ctx, ctx.mul(cm, b)));
            v
        };
        match &value {
            None => value = Some(val),
            Some(prev) => assert_eq!(
                *prev, val,
                "all decompositions of a sigma-torus point must agree"
            ),
        }
    }
    value.unwrap_or_else(|| slots_zero(ctx.p))
}

fn sl2_sigma_closed(ctx: &FieldCtx, ext: &QuadExtCtx, u: Fx) -> Slots {
    let mut value: Option<Slots> = None;
    for a in ext.units() {
        if ext.mul(a, ext.inv(ext.frob(a))) != u {
            continue;
        }
        let t = ext.trace2(a);
        let val = slots_from_int(ctx.p, -sigma(ctx, ctx.mul(t, t)));
        match &value {
            None => value = Some(val),
            Some(prev) => assert_eq!(*prev, val, "parametrisation-independent"),
        }
    }
    value.unwrap_or_else(|| slots_zero(ctx.p))
}

fn pgl2_sigma_closed(ctx: &FieldCtx, ext: &QuadExtCtx, w: Fx) -> Slots {
    let mut value: Option<Slots> = None;
    for a in ext.units() {
        let t = ext.mul(ext.frob(a), ext.inv(a));
        if ext.mul(t, t) != w {
            continue;
        }
        let sp = ext.trace2(a);
        let sm = ext.sub(a, ext.frob(a));
        let cm = ext.to_base(ext.mul(sm, sm)).expect("twisted trace square");
        let val = slots_from_int(
            ctx.p,
            -(sigma(ctx, ctx.mul(sp, sp)) + sigma(ctx, cm)),
        );
        match &value {
            None => value = Some(val),
            Some(prev) => assert_eq!(*prev, val, "parametrisation-independent"),
        }
    }
    value.unwrap_or_else(|| slots_zero(ctx.p))
}

/// Torus-transform table on the standard (split) side: for every F-point of
/// the target torus, the closed-form kernel value next to the literal
/// fiberwise pushforward of `psi(a + b + c)` along the coordinate map.
/// The GL2 transform carries sign `-1`, the others `+1`.
pub fn torus_rows_std(kind: GroupKind, ctx: &FieldCtx) -> Vec<TorusRow> {
    use std::collections::BTreeMap;
    let mut push: BTreeMap<(Fe, Fe), Slots> = BTreeMap::new();
    for a in ctx.units() {
        for b in ctx.units() {
            for c in ctx.units() {
                let key = match kind {
                    GroupKind::Sl2 => (ctx.div(a, c), Fe(0)),
                    GroupKind::Pgl2 => (ctx.div(ctx.mul(c, c), ctx.mul(a, a)), Fe(0)),
                    GroupKind::Gl2 => (
                        ctx.mul(ctx.mul(a, a), b),
                        ctx.mul(b, ctx.mul(c, c)),
                    ),
                };
                let coordsum = ctx.add(ctx.add(a, b), c);
                let sign = if kind == GroupKind::Gl2 { -1 } else { 1 };
                add_psi(
                    ctx,
                    push.entry(key).or_insert_with(|| slots_zero(ctx.p)),
                    coordsum,
                    sign,
                );
            }
        }
    }
    let mut rows = vec![];
    let mut emit = |key: (Fe, Fe), label: String, closed: Slots| {
        let pushed = push.remove(&key).unwrap_or_else(|| slots_zero(ctx.p));
        rows.push(TorusRow {
            key: label,
            closed,
            pushed,
        });
    };
    match kind {
        GroupKind::Sl2 => {
            for d in ctx.units() {
                emit((d, Fe(0)), ctx.fe_str(d), sl2_t_closed(ctx, d));
            }
        }
        GroupKind::Pgl2 => {
            for w in ctx.units() {
                emit((w, Fe(0)), ctx.fe_str(w), pgl2_t_closed(ctx, w));
            }
        }
        GroupKind::Gl2 => {
            for t1 in ctx.units() {
                for t2 in ctx.units() {
                    emit(
                        (t1, t2),
                        format!("({},{})", ctx.fe_str(t1), ctx.fe_str(t2)),
                        gl2_t_closed(ctx, t1, t2),
                    );
                }
            }
        }
    }
    assert!(push.is_empty(), "pushforward keys lie in the torus");
    rows
}

/// Same comparison on the Frobenius-twisted side.  The twisted three-torus
/// F-points are the pairs `(a', b)` with `a'` an extension unit, sitting
/// over coordinates `(a', b, a'^q)`; the pushforward accumulates
/// `psi(tr a' + b)`.
pub fn torus_rows_sigma(kind: GroupKind, ctx: &FieldCtx, ext: &QuadExtCtx) -> Vec<TorusRow> {
    use std::collections::BTreeMap;
    let mut push: BTreeMap<Fx, Slots> = BTreeMap::new();
    for a in ext.units() {
        let fr = ext.frob(a);
        for b in ctx.units() {
            let key = match kind {
                GroupKind::Sl2 => ext.mul(a, ext.inv(fr)),
                GroupKind::Pgl2 => {
                    let t = ext.mul(fr, ext.inv(a));
                    ext.mul(t, t)
                }
                GroupKind::Gl2 => ext.mul(ext.mul(a, a), ext.embed(b)),
            };
            let coordsum = ctx.add(ext.trace2(a), b);
            let sign = if kind == GroupKind::Gl2 { -1 } else { 1 };
            add_psi(
                ctx,
                push.entry(key).or_insert_with(|| slots_zero(ctx.p)),
                coordsum,
                sign,
            );
        }
    }
    // Target F-points: the norm-one circle for SL2/PGL2, all extension
    // units for GL2.
    let keys: Vec<Fx> = match kind {
        GroupKind::Sl2 | GroupKind::Pgl2 => ext
            .units()
            .filter(|&u| ext.norm(u) == ctx.one())
            .collect(),
        GroupKind::Gl2 => ext.units().collect(),
    };
    let mut rows = vec![];
    for key in keys {
        let closed = match kind {
            GroupKind::Sl2 => sl2_sigma_closed(ctx, ext, key),
            GroupKind::Pgl2 => pgl2_sigma_closed(ctx, ext, key),
            GroupKind::Gl2 => gl2_sigma_closed(ctx, ext, key),
        };
        let pushed = push.remove(&key).unwrap_or_else(|| slots_zero(ctx.p));
        rows.push(TorusRow {
            key: ext.fx_str(key),
            closed,
            pushed,
        });
    }
    assert!(push.is_empty(), "pushforward keys lie in the twisted torus");
    rows
}

/// GL2 group kernel assembled from the torus tables, by semisimple part:
/// split regular elements read the standard table, nonsplit regular the
/// twisted one, central and non-semisimple elements mix the two diagonally.
/// Independent of [`phi_group_gl2`]; the two must agree on every class.
pub fn phi_group_gl2_via_table(ctx: &FieldCtx, ext: &QuadExtCtx, p: &StackPoint) -> Slots {
    let g = p.x.scale(ctx, p.b);
    let q = ctx.q as i64;
    match classify_mat(ctx, &g) {
        MatKind::Central(l) => {
            let mut v = slots_scale(gl2_t_closed(ctx, l, l), q + 1);
            slots_add(
                &mut v,
                &slots_scale(gl2_sigma_closed(ctx, ext, ext.embed(l)), 1 - q),
            );
            slots_halve(v)
        }
        MatKind::NonSemisimple(l) => {
            let mut v = gl2_t_closed(ctx, l, l);
            slots_add(&mut v, &gl2_sigma_closed(ctx, ext, ext.embed(l)));
            slots_halve(v)
        }
        MatKind::SplitRegular(d1, d2) => gl2_t_closed(ctx, d1, d2),
        MatKind::NonSplit => {
            let tr = g.trace(ctx);
            let det = g.det(ctx);
            let disc = ctx.sub(ctx.mul(tr, tr), ctx.mul(ctx.from_int(4), det));
            let sd = ext
                .sqrt(ext.embed(disc))
                .expect("nonsplit discriminant has a root upstairs");
            let half = ext.embed(ctx.inv(ctx.from_int(2)));
            let x1 = ext.mul(ext.add(ext.embed(tr), sd), half);
            gl2_sigma_closed(ctx, ext, x1)
        }
    }
}
