//! End-to-end acceptance suite: ten numbered criteria, each printing one
//! PASS/FAIL line (visible with `--nocapture`).  Every comparison is exact;
//! a single mismatched cyclotomic integer anywhere fails the criterion.

use bkfourier::algebra::{
    gauss_sum, gauss_sum_b, kappa, kappa_prime_base, CycNum, Fe, FieldCtx, QuadExtCtx,
};
use bkfourier::checks::prime_power;
use bkfourier::groupoid::{check_involutive, delta_points, slots_to_cyc, Slots};
use bkfourier::groups::{
    char2_groupoid, char2_points, embed, group_groupoid, group_points, in_open_locus,
    stack_groupoid, stack_points, t3_groupoid, torus_stack_groupoid, GroupKind, LineElt, Mat2,
    Sector, StackPoint, T3Point,
};
use bkfourier::kernels::{
    char2_kernel, gauss_slots, phi_char2_group, phi_char2_stack, phi_group, phi_group_gl2,
    phi_group_pgl2, phi_group_sl2, phi_stack, phi_stack_gl2, phi_stack_pgl2, phi_stack_sl2,
    stack_kernel, t3_kernel, t3_negate, torus_gl2_kernel, torus_rows_sigma, torus_rows_std,
};
use bkfourier::quadform::{cone_kernel, weil_closed, weil_sum, QuadSpace};

const CAP: usize = 4096;

fn fctx(q: u32) -> FieldCtx {
    let (p, k) = prime_power(q).expect("prime power");
    FieldCtx::new(p, k).expect("valid field")
}

fn cyc(ctx: &FieldCtx, s: &Slots) -> CycNum {
    slots_to_cyc(ctx.p, s)
}

fn report(n: u32, desc: &str, ok: bool) {
    println!(
        "criterion {:02} [{}]: {}",
        n,
        desc,
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {:02} [{}] FAILED", n, desc);
}

#[test]
fn criterion_01_sl2_stack_involutivity() {
    let mut ok = true;
    for q in [3u32, 5] {
        let ctx = fctx(q);
        let gp = stack_groupoid(GroupKind::Sl2, &ctx).unwrap();
        let r = check_involutive(
            &gp,
            ctx.p,
            stack_kernel(GroupKind::Sl2, &ctx),
            (q as i64).pow(5),
            None,
            CAP,
            |p: &StackPoint| p.render(&ctx),
        )
        .unwrap();
        ok &= r.ok;
    }
    report(1, "SL2 stack transform squares to q^5 at q=3,5", ok);
}

#[test]
fn criterion_02_pgl2_stack_involutivity() {
    let mut ok = true;
    for q in [3u32, 5] {
        let ctx = fctx(q);
        let gp = stack_groupoid(GroupKind::Pgl2, &ctx).unwrap();
        let r = check_involutive(
            &gp,
            ctx.p,
            stack_kernel(GroupKind::Pgl2, &ctx),
            (q as i64).pow(5),
            None,
            CAP,
            |p: &StackPoint| p.render(&ctx),
        )
        .unwrap();
        ok &= r.ok;
        // Both square-class sectors carry the same point mass q^5.
        for s in [0u8, 1] {
            let mass: u64 = gp
                .sector_classes(s)
                .iter()
                .map(|&c| gp.orbit_size[c] as u64)
                .sum();
            ok &= mass == (q as u64).pow(5);
        }
    }
    report(
        2,
        "PGL2 stack transform squares to q^5 on both sectors at q=3,5",
        ok,
    );
}

#[test]
fn criterion_03_stack_kernels_extend_group_kernels() {
    let mut ok = true;
    for q in [3u32, 5] {
        let ctx = fctx(q);
        for kind in [GroupKind::Sl2, GroupKind::Pgl2] {
            for p in group_points(kind, &ctx) {
                ok &= phi_stack(kind, &ctx, &embed(kind, &p)) == phi_group(kind, &ctx, &p);
            }
            // The embedding matches group classes with open-locus stack
            // classes one to one, with trivial stabilizers.
            let g = group_groupoid(kind, &ctx).unwrap();
            let stack = stack_groupoid(kind, &ctx).unwrap();
            let mut embedded = std::collections::BTreeSet::new();
            for c in 0..g.num_classes() {
                let idx = stack.action.index(&embed(kind, g.rep(c))).unwrap();
                let cls = stack.class_of[idx] as usize;
                ok &= stack.aut[cls] == 1;
                embedded.insert(cls);
            }
            let open: std::collections::BTreeSet<usize> = (0..stack.num_classes())
                .filter(|&c| in_open_locus(kind, &ctx, stack.rep(c)))
                .collect();
            ok &= embedded == open && embedded.len() == g.num_classes();
        }
    }
    report(
        3,
        "stack kernels extend the group kernels across the open locus at q=3,5",
        ok,
    );
}

#[test]
fn criterion_04_t3_involutivity_with_negation() {
    let mut ok = true;
    for q in [3u32, 5, 7] {
        let ctx = fctx(q);
        for kind in [GroupKind::Sl2, GroupKind::Pgl2, GroupKind::Gl2] {
            let gp = t3_groupoid(kind, &ctx).unwrap();
            let neg = |p: &T3Point| t3_negate(&ctx, p);
            let r = check_involutive(
                &gp,
                ctx.p,
                t3_kernel(kind, &ctx),
                (q as i64).pow(3),
                Some(&neg),
                CAP,
                |p: &T3Point| p.render(&ctx),
            )
            .unwrap();
            ok &= r.ok;
        }
    }
    report(
        4,
        "three-torus transforms square to q^3 composed with negation at q=3,5,7",
        ok,
    );
}

#[test]
fn criterion_05_quadratic_cone_transform() {
    let mut ok = true;
    for (m, q) in [(1usize, 3u32), (1, 5), (1, 7), (2, 3)] {
        let ctx = fctx(q);
        for c in [ctx.one(), ctx.least_nonsquare()] {
            let space = QuadSpace::split_odd(m, c);
            let cone = space.cone(&ctx);
            ok &= cone.len() as u64 == (q as u64).pow(2 * m as u32);
            let gp = space.cone_groupoid(&ctx).unwrap();
            let r = check_involutive(
                &gp,
                ctx.p,
                cone_kernel(&space, &ctx),
                (q as i64).pow(2 * m as u32),
                None,
                CAP,
                |v| space.render(&ctx, v),
            )
            .unwrap();
            ok &= r.ok;
            for vp in space.vectors(&ctx) {
                ok &= space.f_brute(&ctx, &cone, &vp) == space.f_closed(&ctx, &vp);
            }
            for lambda in ctx.units() {
                ok &= weil_sum(&space, &ctx, lambda) == weil_closed(&space, &ctx, lambda);
            }
        }
    }
    // Orbit structure of the smallest cone: five classes, one with a
    // two-element stabilizer.
    let ctx = fctx(3);
    let gp = QuadSpace::split_odd(1, ctx.one())
        .cone_groupoid(&ctx)
        .unwrap();
    let mut auts = gp.aut.clone();
    auts.sort_unstable();
    ok &= auts == [1, 1, 1, 1, 2];
    // Even-dimensional cones admit no inversion at any scale: some
    // off-diagonal Delta is nonzero.
    let space = QuadSpace::hyperbolic_even(1);
    let gp = space.cone_groupoid(&ctx).unwrap();
    let kern = cone_kernel(&space, &ctx);
    let mut obstructed = false;
    'scan: for cz in 0..gp.num_classes() {
        for cx in 0..gp.num_classes() {
            if cz != cx
                && !delta_points(&gp.action, ctx.p, &kern, gp.rep(cz), gp.rep(cx)).is_zero()
            {
                obstructed = true;
                break 'scan;
            }
        }
    }
    ok &= obstructed;
    report(
        5,
        "quadratic cone transform: counts, involutivity, closed forms, Weil sums, even-dim obstruction",
        ok,
    );
}

#[test]
fn criterion_06_torus_tables() {
    let mut ok = true;
    for q in [3u32, 5, 7] {
        let ctx = fctx(q);
        let ext = QuadExtCtx::new(&ctx).unwrap();
        for kind in [GroupKind::Sl2, GroupKind::Pgl2, GroupKind::Gl2] {
            let std_rows = torus_rows_std(kind, &ctx);
            let sig_rows = torus_rows_sigma(kind, &ctx, &ext);
            ok &= !std_rows.is_empty() && !sig_rows.is_empty();
            for row in std_rows.iter().chain(sig_rows.iter()) {
                ok &= row.closed == row.pushed;
            }
        }
    }
    report(
        6,
        "torus closed forms equal the fiberwise pushforwards on every key at q=3,5,7",
        ok,
    );
}

#[test]
fn criterion_07_kernel_pushforward_identities() {
    let mut ok = true;
    for q in [3u32, 5] {
        let ctx = fctx(q);
        let g = group_groupoid(GroupKind::Pgl2, &ctx).unwrap();
        for c in 0..g.num_classes() {
            let p = g.rep(c);
            let got = cyc(&ctx, &phi_group_pgl2(&ctx, p));
            // mu_2-pushforward from SL2 on the plain sector, zero on the
            // twisted sector.
            let want = if p.alpha.sector == Sector::Twisted {
                CycNum::zero(ctx.p)
            } else {
                let flip = StackPoint {
                    alpha: p.alpha.neg(&ctx),
                    ..*p
                };
                &cyc(&ctx, &phi_group_sl2(&ctx, p)) + &cyc(&ctx, &phi_group_sl2(&ctx, &flip))
            };
            ok &= got == want;
            // Minus the central-fiber sum of the GL2 kernel.
            let mut fiber = CycNum::zero(ctx.p);
            for b in ctx.units() {
                let lift = StackPoint { b, ..*p };
                fiber.add_assign(&cyc(&ctx, &phi_group_gl2(&ctx, &lift)));
            }
            ok &= got == fiber.scale_int(-1);
        }
        // The same mu_2 assembly holds for the stack kernels, boundary
        // included.
        for p in stack_points(GroupKind::Pgl2, &ctx) {
            if p.alpha.sector == Sector::Twisted {
                continue;
            }
            let flip = StackPoint {
                alpha: p.alpha.neg(&ctx),
                ..p
            };
            let want =
                &cyc(&ctx, &phi_stack_sl2(&ctx, &p)) + &cyc(&ctx, &phi_stack_sl2(&ctx, &flip));
            ok &= cyc(&ctx, &phi_stack_pgl2(&ctx, &p)) == want;
        }
    }
    report(
        7,
        "PGL2 kernels assemble from SL2 (mu_2 sum) and GL2 (fiber sum) at q=3,5",
        ok,
    );
}

#[test]
fn criterion_08_gl2_obstructions() {
    let mut ok = true;
    for q in [3u32, 5] {
        let ctx = fctx(q);
        // The GL2 torus transform is not involutive: a fixed off-diagonal
        // class pair carries Delta = 4 alpha0(-1) q.
        let gp = torus_stack_groupoid(GroupKind::Gl2, &ctx).unwrap();
        let z = StackPoint {
            x: Mat2::diag(Fe(1), Fe(0)),
            alpha: LineElt::plain(Fe(0)),
            b: Fe(1),
        };
        let x = StackPoint {
            x: Mat2::diag(Fe(0), Fe(1)),
            alpha: LineElt::plain(Fe(0)),
            b: Fe(1),
        };
        let got = delta_points(&gp.action, ctx.p, torus_gl2_kernel(&ctx), &z, &x);
        let want = CycNum::from_int(ctx.p, 4 * ctx.alpha0(ctx.from_int(-1)) * ctx.q as i64);
        ok &= got == want && !got.is_zero();
        // The GL2 kernel separates classes with equal characteristic
        // polynomials, by exactly -q times the Gauss sum.
        let central = StackPoint {
            x: Mat2::ident(),
            alpha: LineElt::plain(Fe(1)),
            b: Fe(1),
        };
        let unipotent = StackPoint {
            x: Mat2::new(Fe(1), Fe(1), Fe(0), Fe(1)),
            alpha: LineElt::plain(Fe(1)),
            b: Fe(1),
        };
        let diff = &cyc(&ctx, &phi_group_gl2(&ctx, &central))
            - &cyc(&ctx, &phi_group_gl2(&ctx, &unipotent));
        let gauss_gap = cyc(&ctx, &gauss_slots(&ctx)).scale_int(-(ctx.q as i64));
        ok &= diff == gauss_gap && !diff.is_zero();
        // Contrast: the SL2 and PGL2 kernels do descend.
        let g = group_groupoid(GroupKind::Sl2, &ctx).unwrap();
        let mut by_trace = std::collections::BTreeMap::new();
        for c in 0..g.num_classes() {
            let p = g.rep(c);
            let m = p.x.scale(&ctx, ctx.inv(p.alpha.coef));
            let v = phi_group_sl2(&ctx, p);
            if let Some(prev) = by_trace.insert(m.trace(&ctx), v.clone()) {
                ok &= prev == v;
            }
        }
        let g = group_groupoid(GroupKind::Pgl2, &ctx).unwrap();
        let mut by_key = std::collections::BTreeMap::new();
        for c in 0..g.num_classes() {
            let p = g.rep(c);
            let tr = p.x.trace(&ctx);
            let key = (
                p.alpha.sector,
                ctx.div(ctx.mul(tr, tr), p.x.det(&ctx)),
            );
            let v = phi_group_pgl2(&ctx, p);
            if let Some(prev) = by_key.insert(key, v.clone()) {
                ok &= prev == v;
            }
        }
    }
    report(
        8,
        "GL2 negatives: torus Delta = 4 alpha0(-1) q and non-descent, against SL2/PGL2 descent, at q=3,5",
        ok,
    );
}

#[test]
fn criterion_09_characteristic_two() {
    let mut ok = true;
    for k in [1u32, 2] {
        let ctx = FieldCtx::new(2, k).unwrap();
        let q = ctx.q;
        let gp = char2_groupoid(&ctx, false).unwrap();
        let r = check_involutive(
            &gp,
            ctx.p,
            char2_kernel(&ctx),
            (q as i64).pow(5),
            None,
            CAP,
            |p| p.render(&ctx),
        )
        .unwrap();
        ok &= r.ok;
        for p in char2_points(&ctx) {
            if p.x.det(&ctx).0 != 0 && p.b.0 != 0 {
                ok &= phi_char2_stack(&ctx, &p) == phi_char2_group(&ctx, &p);
            }
        }
    }
    report(
        9,
        "characteristic-two stack transform squares to q^5 and restricts to the group kernel at q=2,4",
        ok,
    );
}

#[test]
fn criterion_10_character_sum_identities() {
    let mut ok = true;
    for q in [3u32, 5, 7, 9] {
        let ctx = fctx(q);
        for tau in ctx.elements() {
            let want = if tau.0 == 0 { ctx.q as i64 - 1 } else { -1 };
            ok &= ctx.char_sum(tau) == want;
        }
        let s = gauss_sum(&ctx);
        ok &= &s * &s == CycNum::from_int(ctx.p, ctx.alpha0(ctx.from_int(-1)) * ctx.q as i64);
        let minus_two = CycNum::from_int(ctx.p, -2);
        for b in ctx.units() {
            let sb = gauss_sum_b(&ctx, b);
            ok &= sb == s.scale_int(ctx.alpha0(b));
            let k = kappa(&ctx, b);
            let kp = kappa_prime_base(&ctx, b);
            ok &= &k + &kp == minus_two;
            ok &= &k - &kp == sb.scale_int(2);
        }
    }
    report(
        10,
        "Gauss-sum and kappa identities hold exactly at q=3,5,7,9",
        ok,
    );
}

// Stack kernel values feeding the criteria above never leave the cyclotomic
// integers: the exceptional GL2 branch is the only fractional-looking spot
// and it stays integral too.
#[test]
fn kernel_values_are_cyclotomic_integers() {
    let ctx = fctx(3);
    for p in stack_points(GroupKind::Gl2, &ctx) {
        let _ = cyc(&ctx, &phi_stack_gl2(&ctx, &p));
    }
}
