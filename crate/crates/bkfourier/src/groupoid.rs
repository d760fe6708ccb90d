//! Finite quotient groupoids `[X/H]` presented by a group acting on a point
//! set, plus the exact Fourier-transform checks used throughout the crate.
//!
//! Kernel values are elements of `Z[zeta_p]` stored on the reduced basis
//! `zeta^0..zeta^(p-2)` as `i64` slot vectors ([`Slots`]); all sums and the
//! involutivity comparison are exact integer arithmetic.  A transform
//! attached to a kernel `K` acts on class functions by
//! `F(f)(z) = sum_x 1/|Aut(x)| K(z, x) f(x)`, and `F^2 = scale * twist` is
//! decided by comparing `sum_y 1/|Aut(y)| K(z,y) K(y,x)` against
//! `scale * |Aut(x)| * [x = twist(z)]` for every ordered class pair.

use crate::algebra::{CycNum, Rational};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupoidError {
    #[error("point {0} escapes the point set under the action")]
    NotClosed(String),
    #[error("group element {0} does not act bijectively")]
    NotBijective(usize),
    #[error("action does not preserve sectors at point {0}")]
    SectorMixed(String),
    #[error("orbit size {orbit} does not divide the group order {group}")]
    BadOrbit { orbit: usize, group: usize },
    #[error("{classes} classes exceed the matrix cap {cap}; raise it to proceed")]
    MatrixCap { classes: usize, cap: usize },
    #[error("kernel is not H-invariant near {0}")]
    NotInvariant(String),
}

/// A finite group acting on a sorted point set.  The group is given
/// extensionally: `act(h, x)` for `h` in `0..h_order` must enumerate the
/// whole group, identity included.
pub struct Action<P> {
    pub points: Vec<P>,
    pub h_order: usize,
    act_t: Vec<u32>, // h_order rows of length points.len()
    pub sector_of: Vec<u8>,
}

impl<P: Copy + Ord + std::fmt::Debug> Action<P> {
    pub fn new(
        mut points: Vec<P>,
        h_order: usize,
        act: impl Fn(usize, &P) -> P,
        sector: impl Fn(&P) -> u8,
    ) -> Result<Action<P>, GroupoidError> {
        points.sort_unstable();
        points.dedup();
        let n = points.len();
        let sector_of: Vec<u8> = points.iter().map(&sector).collect();
        let mut act_t = vec![0u32; h_order * n];
        for h in 0..h_order {
            let mut seen = vec![false; n];
            for i in 0..n {
                let image = act(h, &points[i]);
                let j = points
                    .binary_search(&image)
                    .map_err(|_| GroupoidError::NotClosed(format!("{image:?}")))?;
                if sector_of[j] != sector_of[i] {
                    return Err(GroupoidError::SectorMixed(format!("{:?}", points[i])));
                }
                if seen[j] {
                    return Err(GroupoidError::NotBijective(h));
                }
                seen[j] = true;
                act_t[h * n + i] = j as u32;
            }
        }
        Ok(Action {
            points,
            h_order,
            act_t,
            sector_of,
        })
    }

    pub fn apply(&self, h: usize, i: usize) -> usize {
        self.act_t[h * self.points.len() + i] as usize
    }

    pub fn index(&self, p: &P) -> Option<usize> {
        self.points.binary_search(p).ok()
    }
}

/// Orbit data of an [`Action`]: class representatives (the least point of
/// each orbit), orbit sizes and automorphism-group orders.
pub struct Groupoid<P> {
    pub action: Action<P>,
    pub class_of: Vec<u32>,
    pub reps: Vec<u32>,
    pub orbit_size: Vec<u32>,
    pub aut: Vec<u64>,
}

impl<P: Copy + Ord + std::fmt::Debug> Groupoid<P> {
    pub fn new(action: Action<P>) -> Result<Groupoid<P>, GroupoidError> {
        let n = action.points.len();
        let mut class_of = vec![u32::MAX; n];
        let mut reps = vec![];
        let mut orbit_size = vec![];
        let mut aut = vec![];
        for i in 0..n {
            if class_of[i] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            let mut members = vec![];
            for h in 0..action.h_order {
                let j = action.apply(h, i);
                if class_of[j] == u32::MAX {
                    class_of[j] = c;
                    members.push(j);
                }
            }
            if action.h_order % members.len() != 0 {
                return Err(GroupoidError::BadOrbit {
                    orbit: members.len(),
                    group: action.h_order,
                });
            }
            reps.push(i as u32);
            orbit_size.push(members.len() as u32);
            aut.push((action.h_order / members.len()) as u64);
        }
        // The act list must exhaust a group: orbits must be stable under
        // every listed element.
        for i in 0..n {
            for h in 0..action.h_order {
                if class_of[action.apply(h, i)] != class_of[i] {
                    return Err(GroupoidError::BadOrbit {
                        orbit: 0,
                        group: action.h_order,
                    });
                }
            }
        }
        // Mass balance: sum over classes of |H|/|Aut| recovers the point count.
        let mass: u64 = orbit_size.iter().map(|&s| s as u64).sum();
        assert_eq!(mass, n as u64, "orbits partition the point set");
        Ok(Groupoid {
            action,
            class_of,
            reps,
            orbit_size,
            aut,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.reps.len()
    }

    pub fn rep(&self, c: usize) -> &P {
        &self.action.points[self.reps[c] as usize]
    }

    /// Classes whose points lie in the given sector.
    pub fn sector_classes(&self, sector: u8) -> Vec<usize> {
        (0..self.num_classes())
            .filter(|&c| self.action.sector_of[self.reps[c] as usize] == sector)
            .collect()
    }
}

/// Exact element of `Z[zeta_p]` on the reduced basis `zeta^0..zeta^(p-2)`.
pub type Slots = Vec<i64>;

pub fn slots_zero(p: u32) -> Slots {
    vec![0; (p - 1) as usize]
}

/// Adds `c * zeta_p^e` (any `e` in `0..p`) to a reduced slot vector.
pub fn slots_add_zeta(slots: &mut [i64], p: u32, e: u32, c: i64) {
    let e = (e % p) as usize;
    if e < (p - 1) as usize {
        slots[e] += c;
    } else {
        for s in slots.iter_mut() {
            *s -= c;
        }
    }
}

pub fn slots_from_int(p: u32, n: i64) -> Slots {
    let mut s = slots_zero(p);
    s[0] = n;
    s
}

pub fn slots_to_cyc(p: u32, slots: &[i64]) -> CycNum {
    CycNum::from_slots(
        p,
        slots
            .iter()
            .map(|&c| Rational::from(num::BigInt::from(c)))
            .collect(),
    )
}

fn i128_to_cyc(p: u32, slots: &[i128]) -> CycNum {
    CycNum::from_slots(
        p,
        slots
            .iter()
            .map(|&c| Rational::from(num::BigInt::from(c)))
            .collect(),
    )
}

/// Accumulates `w * a * b` into `acc` (reduced-basis product in `Z[zeta_p]`).
fn slot_mul_acc(acc: &mut [i128], a: &[i64], b: &[i64], w: i64, p: u32) {
    let l = (p - 1) as usize;
    for i in 0..l {
        if a[i] == 0 {
            continue;
        }
        for j in 0..l {
            if b[j] == 0 {
                continue;
            }
            let c = a[i] as i128 * b[j] as i128 * w as i128;
            let e = (i + j) % p as usize;
            if e < l {
                acc[e] += c;
            } else {
                for t in acc.iter_mut() {
                    *t -= c;
                }
            }
        }
    }
}

/// Outcome of an involutivity check; `witness` holds the first failing
/// ordered class pair in scan order.
#[derive(Debug)]
pub struct InvReport {
    pub classes: usize,
    pub points: usize,
    pub ok: bool,
    pub witness: Option<InvWitness>,
}

#[derive(Debug)]
pub struct InvWitness {
    pub z: String,
    pub x: String,
    pub got: CycNum,
    pub want: CycNum,
}

/// Verifies `F^2 = scale * twist` for the transform with kernel `K` on the
/// groupoid, where `twist` maps a point to a point of the image class
/// (identity when `None`).  `K` must be constant on orbits in each variable
/// separately; spot-verified here against `probes` columns, exhaustively in
/// the first variable.
pub fn check_involutive<P: Copy + Ord + Send + Sync + std::fmt::Debug>(
    gp: &Groupoid<P>,
    p: u32,
    kernel: impl Fn(&P, &P) -> Slots + Sync,
    scale: i64,
    twist: Option<&(dyn Fn(&P) -> P + Sync)>,
    cap: usize,
    fmt: impl Fn(&P) -> String + Sync,
) -> Result<InvReport, GroupoidError> {
    let n = gp.num_classes();
    if n > cap {
        return Err(GroupoidError::MatrixCap { classes: n, cap });
    }
    let l = (p - 1) as usize;
    let pts = &gp.action.points;

    // Invariance sampling: every point against a strided probe set of reps.
    let probes: Vec<P> = gp
        .reps
        .iter()
        .step_by(1.max(n / 8))
        .map(|&r| pts[r as usize])
        .collect();
    for i in 0..pts.len() {
        let base: Vec<Slots> = probes.iter().map(|y| kernel(&pts[i], y)).collect();
        let base_t: Vec<Slots> = probes.iter().map(|y| kernel(y, &pts[i])).collect();
        for h in 0..gp.action.h_order {
            let j = gp.action.apply(h, i);
            if j == i {
                continue;
            }
            for (k, y) in probes.iter().enumerate() {
                if kernel(&pts[j], y) != base[k] || kernel(y, &pts[j]) != base_t[k] {
                    return Err(GroupoidError::NotInvariant(fmt(&pts[i])));
                }
            }
        }
    }

    // Class-level twist map.
    let twist_cls: Vec<usize> = (0..n)
        .map(|c| {
            let r = pts[gp.reps[c] as usize];
            let image = match twist {
                Some(t) => t(&r),
                None => r,
            };
            gp.class_of[gp.action.index(&image).expect("twist stays in the point set")] as usize
        })
        .collect();
    for c in 0..n {
        assert_eq!(twist_cls[twist_cls[c]], c, "twist is an involution on classes");
        assert_eq!(gp.aut[c], gp.aut[twist_cls[c]]);
    }

    // Kernel matrix on representatives, flat with stride l.
    let mat: Vec<i64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let zi = pts[gp.reps[i] as usize];
            let mut row = Vec::with_capacity(n * l);
            for j in 0..n {
                row.extend_from_slice(&kernel(&zi, &pts[gp.reps[j] as usize]));
            }
            row
        })
        .collect();

    // |H| * Delta(z, x) = sum_j orbit_j K(z, j) K(j, x), compared with
    // |H| * scale * |Aut(x)| [x = twist(z)].
    let h_order = gp.action.h_order as i64;
    let failures: Vec<(usize, usize, Vec<i128>)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|z| {
            let mut out = vec![];
            let mut acc = vec![0i128; l];
            for x in 0..n {
                for t in acc.iter_mut() {
                    *t = 0;
                }
                for j in 0..n {
                    slot_mul_acc(
                        &mut acc,
                        &mat[(z * n + j) * l..(z * n + j + 1) * l],
                        &mat[(j * n + x) * l..(j * n + x + 1) * l],
                        gp.orbit_size[j] as i64,
                        p,
                    );
                }
                let expect: i128 = if twist_cls[z] == x {
                    (h_order * scale * gp.aut[x] as i64) as i128
                } else {
                    0
                };
                let ok = acc[0] == expect && acc[1..].iter().all(|&c| c == 0);
                if !ok {
                    out.push((z, x, acc.clone()));
                }
            }
            out
        })
        .collect();

    let witness = failures.into_iter().min_by_key(|&(z, x, _)| (z, x)).map(|(z, x, acc)| {
        let inv_h = Rational::new(1.into(), gp.action.h_order.into());
        let got = i128_to_cyc(p, &acc).scale(&inv_h);
        let want = if twist_cls[z] == x {
            CycNum::from_int(p, scale * gp.aut[x] as i64)
        } else {
            CycNum::zero(p)
        };
        InvWitness {
            z: fmt(&pts[gp.reps[z] as usize]),
            x: fmt(&pts[gp.reps[x] as usize]),
            got,
            want,
        }
    });

    Ok(InvReport {
        classes: n,
        points: pts.len(),
        ok: witness.is_none(),
        witness,
    })
}

/// `Delta(z, x) = 1/|H| sum_{y in points} K(z, y) K(y, x)` at two fixed
/// points, as an exact cyclotomic number.  Well defined for any kernel,
/// orbit-invariant or not.
pub fn delta_points<P: Copy + Ord + std::fmt::Debug>(
    action: &Action<P>,
    p: u32,
    kernel: impl Fn(&P, &P) -> Slots,
    z: &P,
    x: &P,
) -> CycNum {
    let l = (p - 1) as usize;
    let mut acc = vec![0i128; l];
    for y in &action.points {
        slot_mul_acc(&mut acc, &kernel(z, y), &kernel(y, x), 1, p);
    }
    i128_to_cyc(p, &acc).scale(&Rational::new(1.into(), action.h_order.into()))
}

/// Applies the transform with kernel `K` to a class function, exactly:
/// `F(f)(z) = sum_x orbit(x)/|H| K(z, x) f(x)`.
pub fn apply<P: Copy + Ord + std::fmt::Debug>(
    gp: &Groupoid<P>,
    p: u32,
    kernel: impl Fn(&P, &P) -> Slots,
    f: &[CycNum],
) -> Vec<CycNum> {
    assert_eq!(f.len(), gp.num_classes());
    let inv_h = Rational::new(1.into(), gp.action.h_order.into());
    (0..gp.num_classes())
        .map(|z| {
            let mut acc = CycNum::zero(p);
            for x in 0..gp.num_classes() {
                let k = slots_to_cyc(p, &kernel(gp.rep(z), gp.rep(x)));
                let w = Rational::from(num::BigInt::from(gp.orbit_size[x]));
                acc.add_assign(&(&k * &f[x]).scale(&w));
            }
            acc.scale(&inv_h)
        })
        .collect()
}

/// Checks that summing a finer kernel over translates of either variable
/// gives the same quotient kernel: `sum_h K(h(u), v) = sum_h K(u, h(v))`
/// for every pair drawn from `pts`; returns that common kernel table.
pub fn quotient_kernel<P: Copy>(
    p: u32,
    kernel: impl Fn(&P, &P) -> Slots,
    maps: &[Box<dyn Fn(&P) -> P>],
    pts: &[P],
) -> Result<Vec<Slots>, GroupoidError> {
    let l = (p - 1) as usize;
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for u in pts {
        for v in pts {
            let mut left = vec![0i64; l];
            let mut right = vec![0i64; l];
            for m in maps {
                let ku = kernel(&m(u), v);
                let kv = kernel(u, &m(v));
                for t in 0..l {
                    left[t] += ku[t];
                    right[t] += kv[t];
                }
            }
            if left != right {
                return Err(GroupoidError::NotInvariant("quotient sums disagree".into()));
            }
            out.push(left);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Fe, FieldCtx};

    fn gl1_groupoid(q: u32) -> (FieldCtx, Groupoid<Fe>) {
        let ctx = FieldCtx::new(q, 1).unwrap();
        let points: Vec<Fe> = ctx.elements().collect();
        let units: Vec<Fe> = ctx.units().collect();
        let action = Action::new(
            points,
            units.len(),
            |h, x| ctx.mul(units[h], *x),
            |_| 0,
        )
        .unwrap();
        let gp = Groupoid::new(action).unwrap();
        (FieldCtx::new(q, 1).unwrap(), gp)
    }

    #[test]
    fn gl1_orbits() {
        let (_, gp) = gl1_groupoid(3);
        assert_eq!(gp.num_classes(), 2);
        assert_eq!(*gp.rep(0), Fe(0));
        assert_eq!(*gp.rep(1), Fe(1));
        assert_eq!(gp.aut, vec![2, 1]);
        assert_eq!(gp.orbit_size, vec![1, 2]);
    }

    #[test]
    fn gl1_fourier_is_involutive_with_scale_q() {
        // Kernel sigma(yx) on [gl_1/GL_1]: F^2 = q * id, Delta = q diag(|Aut|).
        for q in [3u32, 5, 7] {
            let (ctx, gp) = gl1_groupoid(q);
            let kernel = |z: &Fe, y: &Fe| slots_from_int(q, ctx.char_sum(ctx.mul(*z, *y)));
            let rep = check_involutive(&gp, q, kernel, q as i64, None, 100, |x: &Fe| {
                ctx.fe_str(*x)
            })
            .unwrap();
            assert!(rep.ok, "witness: {:?}", rep.witness.map(|w| (w.z, w.x)));
            assert_eq!(rep.classes, 2);
            // Point-level Delta agrees with the class-level identity.
            let d00 = delta_points(&gp.action, q, kernel, &Fe(0), &Fe(0));
            assert_eq!(d00, CycNum::from_int(q, (q as i64) * (q as i64 - 1)));
            let d11 = delta_points(&gp.action, q, kernel, &Fe(1), &Fe(1));
            assert_eq!(d11, CycNum::from_int(q, q as i64));
            let d01 = delta_points(&gp.action, q, kernel, &Fe(0), &Fe(1));
            assert!(d01.is_zero());
        }
    }

    #[test]
    fn gl1_delta_oracle_q3() {
        // Delta = {{6, 0}, {0, 3}} at q = 3.
        let (ctx, gp) = gl1_groupoid(3);
        let kernel = |z: &Fe, y: &Fe| slots_from_int(3, ctx.char_sum(ctx.mul(*z, *y)));
        let d = |z: Fe, x: Fe| delta_points(&gp.action, 3, &kernel, &z, &x);
        assert_eq!(d(Fe(0), Fe(0)), CycNum::from_int(3, 6));
        assert_eq!(d(Fe(1), Fe(1)), CycNum::from_int(3, 3));
        assert!(d(Fe(0), Fe(1)).is_zero());
        assert!(d(Fe(1), Fe(0)).is_zero());
    }

    #[test]
    fn apply_twice_scales_basis_functions() {
        let (ctx, gp) = gl1_groupoid(5);
        let kernel = |z: &Fe, y: &Fe| slots_from_int(5, ctx.char_sum(ctx.mul(*z, *y)));
        for b in 0..gp.num_classes() {
            let mut f = vec![CycNum::zero(5); gp.num_classes()];
            f[b] = CycNum::one(5);
            let ff = apply(&gp, 5, &kernel, &apply(&gp, 5, &kernel, &f));
            for c in 0..gp.num_classes() {
                assert_eq!(ff[c], f[c].scale_int(5));
            }
        }
    }

    #[test]
    fn apply_is_linear() {
        let (ctx, gp) = gl1_groupoid(5);
        let kernel = |z: &Fe, y: &Fe| slots_from_int(5, ctx.char_sum(ctx.mul(*z, *y)));
        let f = vec![CycNum::from_int(5, 3), CycNum::zeta_pow(5, 2)];
        let g = vec![CycNum::zeta_pow(5, 1), CycNum::from_int(5, -2)];
        let sum: Vec<CycNum> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let lhs = apply(&gp, 5, &kernel, &sum);
        let rf = apply(&gp, 5, &kernel, &f);
        let rg = apply(&gp, 5, &kernel, &g);
        for c in 0..gp.num_classes() {
            assert_eq!(lhs[c], &rf[c] + &rg[c]);
        }
    }

    #[test]
    fn twist_by_negation_is_tracked() {
        // Kernel psi(zy) on all of F_q with trivial group: F^2 = q * f(-x).
        let ctx = FieldCtx::new(5, 1).unwrap();
        let points: Vec<Fe> = ctx.elements().collect();
        let action = Action::new(points, 1, |_, x| *x, |_| 0).unwrap();
        let gp = Groupoid::new(action).unwrap();
        let kernel = |z: &Fe, y: &Fe| {
            let mut s = slots_zero(5);
            slots_add_zeta(&mut s, 5, ctx.psi_exp(ctx.mul(*z, *y)), 1);
            s
        };
        let neg = |x: &Fe| ctx.neg(*x);
        let rep = check_involutive(&gp, 5, kernel, 5, Some(&neg), 100, |x: &Fe| ctx.fe_str(*x))
            .unwrap();
        assert!(rep.ok);
        // Without the twist the check must fail; 0 is negation-fixed, so the
        // first failing pair in scan order is (1, 1).
        let rep = check_involutive(&gp, 5, kernel, 5, None, 100, |x: &Fe| ctx.fe_str(*x)).unwrap();
        assert!(!rep.ok);
        let w = rep.witness.unwrap();
        assert_eq!((w.z.as_str(), w.x.as_str()), ("1", "1"));
        assert!(w.got.is_zero());
        assert_eq!(w.want, CycNum::from_int(5, 5));
    }

    #[test]
    fn matrix_cap_is_enforced() {
        let (ctx, gp) = gl1_groupoid(7);
        let kernel = |z: &Fe, y: &Fe| slots_from_int(7, ctx.char_sum(ctx.mul(*z, *y)));
        let err = check_involutive(&gp, 7, kernel, 7, None, 1, |x: &Fe| ctx.fe_str(*x));
        assert!(matches!(err, Err(GroupoidError::MatrixCap { classes: 2, cap: 1 })));
    }

    #[test]
    fn non_invariant_kernel_is_rejected() {
        let (ctx, gp) = gl1_groupoid(5);
        // z + y is not invariant under scaling.
        let kernel =
            |z: &Fe, y: &Fe| slots_from_int(5, ctx.add(*z, *y).0 as i64);
        let err = check_involutive(&gp, 5, kernel, 5, None, 100, |x: &Fe| ctx.fe_str(*x));
        assert!(matches!(err, Err(GroupoidError::NotInvariant(_))));
    }

    #[test]
    fn quotient_kernel_sums_agree_for_symmetric_kernels() {
        let ctx = FieldCtx::new(5, 1).unwrap();
        let pts: Vec<Fe> = ctx.elements().collect();
        // K(u, v) = sigma(uv) summed over the sign action {1, -1}.
        let maps: Vec<Box<dyn Fn(&Fe) -> Fe>> = vec![
            Box::new(|x: &Fe| *x),
            Box::new({
                let ctx = FieldCtx::new(5, 1).unwrap();
                move |x: &Fe| ctx.neg(*x)
            }),
        ];
        let kernel = |u: &Fe, v: &Fe| slots_from_int(5, ctx.char_sum(ctx.mul(*u, *v)));
        let table = quotient_kernel(5, kernel, &maps, &pts).unwrap();
        // sigma(uv) + sigma(-uv) = 2 sigma(uv).
        for (idx, u) in pts.iter().enumerate() {
            for (jdx, v) in pts.iter().enumerate() {
                assert_eq!(
                    table[idx * pts.len() + jdx][0],
                    2 * ctx.char_sum(ctx.mul(*u, *v))
                );
            }
        }
    }

    #[test]
    fn bad_actions_are_rejected() {
        let pts: Vec<Fe> = (0..4).map(Fe).collect();
        // Non-bijective "action".
        let err = Action::new(pts.clone(), 2, |h, x| if h == 0 { *x } else { Fe(0) }, |_| 0);
        assert!(matches!(err, Err(GroupoidError::NotBijective(1))));
        // Escaping action.
        let err = Action::new(pts.clone(), 1, |_, x| Fe(x.0 + 1), |_| 0);
        assert!(matches!(err, Err(GroupoidError::NotClosed(_))));
        // Sector mixing.
        let err = Action::new(
            pts,
            2,
            |h, x| if h == 0 { *x } else { Fe(x.0 ^ 1) },
            |x| (x.0 % 2) as u8,
        );
        assert!(matches!(err, Err(GroupoidError::SectorMixed(_))));
    }
}
