//! Named verification jobs over the library: per-group default grids,
//! configuration validation, and runners that turn the kernel identities
//! into report records.
//!
//! Positive theorems report `pass`/`fail`; negative demonstrations (the GL2
//! torus obstruction, non-descent, the even-dimensional cone) report
//! `finding` when the expected obstruction shows up and `fail` when it does
//! not.  Anything structurally wrong with the requested configuration is a
//! [`ConfigError`], kept distinct from a falsified identity.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::algebra::{
    gauss_sum, gauss_sum_b, kappa, kappa_prime_base, CycNum, Fe, FieldCtx, QuadExtCtx,
};
use crate::groupoid::{
    check_involutive, delta_points, slots_to_cyc, slots_zero, GroupoidError, Slots,
};
use crate::groups::{
    char2_groupoid, char2_points, embed, group_groupoid, group_points, in_open_locus,
    stack_groupoid, stack_points, t3_groupoid, torus_stack_groupoid, GroupKind, LineElt, Mat2,
    Sector, StackPoint, T3Point,
};
use crate::kernels::{
    char2_kernel, gauss_slots, phi_char2_group, phi_char2_stack, phi_group, phi_group_gl2,
    phi_group_gl2_via_table, phi_group_pgl2, phi_group_sl2, phi_stack, phi_stack_gl2,
    phi_stack_pgl2, phi_stack_sl2, slots_add, slots_scale, slots_sub, stack_kernel, t3_kernel,
    t3_negate, torus_gl2_kernel, torus_rows_sigma, torus_rows_std, TorusRow,
};
use crate::quadform::{
    cone_kernel, quadric_groupoid, quadric_kernel, quadric_points, render_cone_pt, weil_closed,
    weil_sum, QuadSpace, QuadricKernel,
};
use crate::report::{CheckRecord, Report, RunConfig, Status};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupSel {
    Sl2,
    Pgl2,
    Gl2,
    Gl2Char2,
    Torus,
    Quadform,
}

impl GroupSel {
    pub const ALL: [GroupSel; 6] = [
        GroupSel::Sl2,
        GroupSel::Pgl2,
        GroupSel::Gl2,
        GroupSel::Gl2Char2,
        GroupSel::Torus,
        GroupSel::Quadform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupSel::Sl2 => "sl2",
            GroupSel::Pgl2 => "pgl2",
            GroupSel::Gl2 => "gl2",
            GroupSel::Gl2Char2 => "gl2-char2",
            GroupSel::Torus => "torus",
            GroupSel::Quadform => "quadform",
        }
    }

    pub fn parse(s: &str) -> Option<GroupSel> {
        GroupSel::ALL.into_iter().find(|g| g.name() == s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Category {
    Kernels,
    Involutivity,
    Extension,
    Pushforward,
    Quadform,
    Gauss,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Kernels,
        Category::Involutivity,
        Category::Extension,
        Category::Pushforward,
        Category::Quadform,
        Category::Gauss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Kernels => "kernels",
            Category::Involutivity => "involutivity",
            Category::Extension => "extension",
            Category::Pushforward => "pushforward",
            Category::Quadform => "quadform",
            Category::Gauss => "gauss",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub groups: Vec<GroupSel>,
    /// Explicit field sizes; `None` selects the per-group default grid.
    pub qs: Option<Vec<u32>>,
    pub checks: Vec<Category>,
    pub matrix_cap: usize,
    pub stack_q_limit: u32,
    pub threads: usize,
    pub export_dir: Option<PathBuf>,
}

impl JobConfig {
    pub fn to_run_config(&self) -> RunConfig {
        RunConfig {
            groups: self.groups.iter().map(|g| g.name().to_string()).collect(),
            qs: self.qs.clone().unwrap_or_default(),
            checks: self.checks.iter().map(|c| c.name().to_string()).collect(),
            matrix_cap: self.matrix_cap,
            stack_q_limit: self.stack_q_limit,
            threads: self.threads,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn gerr(e: GroupoidError) -> ConfigError {
    ConfigError(e.to_string())
}

/// `q = p^k` for a prime `p`, or `None`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut k = 0;
    while rest > 1 {
        if rest % p != 0 {
            return None;
        }
        rest /= p;
        k += 1;
    }
    Some((p, k))
}

fn field(q: u32) -> Result<FieldCtx, ConfigError> {
    let (p, k) =
        prime_power(q).ok_or_else(|| ConfigError(format!("q={} is not a prime power", q)))?;
    FieldCtx::new(p, k).map_err(|e| ConfigError(e.to_string()))
}

pub fn validate(cfg: &JobConfig) -> Result<(), ConfigError> {
    if cfg.groups.is_empty() {
        return Err(ConfigError("no groups selected".into()));
    }
    if cfg.checks.is_empty() {
        return Err(ConfigError("no check categories selected".into()));
    }
    let Some(qs) = &cfg.qs else { return Ok(()) };
    if qs.is_empty() {
        return Err(ConfigError("empty field-size list".into()));
    }
    for &q in qs {
        let Some((p, _)) = prime_power(q) else {
            return Err(ConfigError(format!("q={} is not a prime power", q)));
        };
        for &g in &cfg.groups {
            match g {
                GroupSel::Gl2Char2 => {
                    if p != 2 {
                        return Err(ConfigError(format!(
                            "gl2-char2 runs in characteristic 2; q={} has characteristic {}",
                            q, p
                        )));
                    }
                }
                _ => {
                    if p == 2 {
                        return Err(ConfigError(format!(
                            "{} needs odd characteristic; q={} is even",
                            g.name(),
                            q
                        )));
                    }
                }
            }
        }
        if cfg.checks.contains(&Category::Involutivity) && q > cfg.stack_q_limit {
            let stacky = cfg.groups.iter().any(|g| {
                matches!(
                    g,
                    GroupSel::Sl2 | GroupSel::Pgl2 | GroupSel::Gl2 | GroupSel::Gl2Char2
                )
            });
            if stacky {
                return Err(ConfigError(format!(
                    "stack involutivity at q={} exceeds --stack-q-limit {}; raise it to proceed",
                    q, cfg.stack_q_limit
                )));
            }
        }
    }
    Ok(())
}

fn grid(g: GroupSel, cfg: &JobConfig) -> Vec<u32> {
    if let Some(qs) = &cfg.qs {
        return qs.clone();
    }
    match g {
        GroupSel::Sl2 | GroupSel::Pgl2 | GroupSel::Gl2 => vec![3, 5],
        GroupSel::Gl2Char2 => vec![2, 4],
        GroupSel::Torus => vec![3, 5, 7],
        GroupSel::Quadform => vec![3, 5, 7],
    }
}

/// Quadratic-space shapes `(m, q)` for split forms of dimension `2m + 1`.
fn quad_grid(cfg: &JobConfig) -> Vec<(usize, u32)> {
    match &cfg.qs {
        Some(qs) => qs.iter().map(|&q| (1, q)).collect(),
        None => vec![(1, 3), (1, 5), (1, 7), (2, 3)],
    }
}

fn gauss_grid(cfg: &JobConfig) -> Vec<u32> {
    match &cfg.qs {
        Some(qs) => qs.iter().copied().filter(|q| q % 2 == 1).collect(),
        None => vec![3, 5, 7, 9],
    }
}

fn rec(id: String, group: &str, q: u32, category: Category) -> CheckRecord {
    CheckRecord {
        id,
        group: group.into(),
        q,
        category: category.name().into(),
        status: Status::Pass,
        theorem_backed: true,
        expected: String::new(),
        computed: String::new(),
        witness: None,
        classes: None,
        points: None,
        detail: String::new(),
        wall_ms: 0,
    }
}

fn push(rep: &mut Report, t0: Instant, mut r: CheckRecord) {
    r.wall_ms = t0.elapsed().as_millis() as u64;
    rep.push(r);
}

fn fail(r: &mut CheckRecord, witness: String) {
    r.status = Status::Fail;
    r.computed = "mismatch".into();
    r.witness = Some(witness);
}

pub fn run(cfg: &JobConfig) -> Result<Report, ConfigError> {
    validate(cfg)?;
    let mut rep = Report::new(cfg.to_run_config());
    let has = |c: Category| cfg.checks.contains(&c);
    for &g in &cfg.groups {
        match g {
            GroupSel::Sl2 | GroupSel::Pgl2 => {
                let kind = match g {
                    GroupSel::Sl2 => GroupKind::Sl2,
                    _ => GroupKind::Pgl2,
                };
                for q in grid(g, cfg) {
                    if has(Category::Involutivity) {
                        stack_involutivity_check(kind, g.name(), q, cfg.matrix_cap, &mut rep)?;
                        t3_involutivity_check(kind, g.name(), q, cfg.matrix_cap, &mut rep)?;
                    }
                    if has(Category::Kernels) {
                        kernel_descent_check(kind, g.name(), q, &mut rep)?;
                    }
                    if has(Category::Extension) {
                        group_extension_check(kind, g.name(), q, &mut rep)?;
                    }
                    if g == GroupSel::Pgl2 && has(Category::Pushforward) {
                        pgl2_pushforward_checks(q, &mut rep)?;
                    }
                }
            }
            GroupSel::Gl2 => {
                for q in grid(g, cfg) {
                    if has(Category::Involutivity) {
                        t3_involutivity_check(GroupKind::Gl2, "gl2", q, cfg.matrix_cap, &mut rep)?;
                        gl2_torus_delta_check(q, &mut rep)?;
                    }
                    if has(Category::Kernels) {
                        gl2_kernel_checks(q, &mut rep)?;
                    }
                }
            }
            GroupSel::Gl2Char2 => {
                for q in grid(g, cfg) {
                    char2_checks(
                        q,
                        cfg.matrix_cap,
                        has(Category::Involutivity),
                        has(Category::Kernels),
                        &mut rep,
                    )?;
                }
            }
            GroupSel::Torus => {
                if has(Category::Pushforward) {
                    for q in grid(g, cfg) {
                        torus_table_checks(q, &mut rep)?;
                    }
                }
            }
            GroupSel::Quadform => {
                if has(Category::Quadform) {
                    quadform_checks(cfg, &mut rep)?;
                }
            }
        }
    }
    if has(Category::Gauss) {
        for q in gauss_grid(cfg) {
            gauss_checks(q, &mut rep)?;
        }
    }
    if let Some(dir) = &cfg.export_dir {
        export_tables(cfg, dir)?;
    }
    rep.finalize();
    Ok(rep)
}

fn stack_involutivity_check(
    kind: GroupKind,
    group: &str,
    q: u32,
    cap: usize,
    out: &mut Report,
) -> Result<(), ConfigError> {
    let t0 = Instant::now();
    let ctx = field(q)?;
    let gp = stack_groupoid(kind, &ctx).map_err(gerr)?;
    let scale = (q as i64).pow(5);
    let inv = check_involutive(
        &gp,
        ctx.p,
        stack_kernel(kind, &ctx),
        scale,
        None,
        cap,
        |p: &StackPoint| p.render(&ctx),
    )
    .map_err(gerr)?;
    let mut r = rec("stack-involutivity".into(), group, q, Category::Involutivity);
    r.expected = format!("F^2 = {}*id", scale);
    r.classes = Some(inv.classes);
    r.points = Some(inv.points);
    if inv.ok {
        r.computed = r.expected.clone();
    } else {
        let w = inv.witness.expect("failed check carries a witness");
        fail(
            &mut r,
            format!("z={} x={} got={} want={}", w.z, w.x, w.got, w.want),
        );
    }
    push(out, t0, r);
    Ok(())
}

fn t3_involutivity_check(
    kind: GroupKind,
    group: &str,
    q: u32,
    cap: usize,
    out: &mut Report,
) -> Result<(), ConfigError> {
    let t0 = Instant::now();
    let ctx = field(q)?;
    let gp = t3_groupoid(kind, &ctx).map_err(gerr)?;
    let scale = (q as i64).pow(3);
    let neg = |p: &T3Point| t3_negate(&ctx, p);
    let inv = check_involutive(
        &gp,
        ctx.p,
        t3_kernel(kind, &ctx),
        scale,
        Some(&neg),
        cap,
        |p: &T3Point| p.render(&ctx),
    )
    .map_err(gerr)?;
    let mut r = rec("t3-involutivity".into(), group, q, Category::Involutivity);
    r.expected = format!("F^2 = {}*pullback(negation)", scale);
    r.classes = Some(inv.classes);
    r.points = Some(inv.points);
    if inv.ok {
        r.computed = r.expected.clone();
    } else {
        let w = inv.witness.expect("failed check carries a witness");
        fail(
            &mut r,
            format!("z={} x={} got={} want={}", w.z, w.x, w.got, w.want),
        );
    }
    push(out, t0, r);
    Ok(())
}

fn kernel_descent_check(
    kind: GroupKind,
    group: &str,
    q: u32,
    out: &mut Report,
) -> Result<(), ConfigError> {
    let t0 = Instant::now();
    let ctx = field(q)?;
    let g = group_groupoid(kind, &ctx).map_err(gerr)?;
    let mut seen: BTreeMap<String, Slots> = BTreeMap::new();
    let mut bad = None;
    for c in 0..g.num_classes() {
        let p = g.rep(c);
        let (key, v) = match kind {
            GroupKind::Sl2 => {
                let m = p.x.scale(&ctx, ctx.inv(p.alpha.coef));
                (ctx.fe_str(m.trace(&ctx)), phi_group_sl2(&ctx, p))
            }
            GroupKind::Pgl2 => {
                let tr = p.x.trace(&ctx);
                let ratio = ctx.div(ctx.mul(tr, tr), p.x.det(&ctx));
                let key = format!("{:?}:{}", p.alpha.sector, ctx.fe_str(ratio));
                (key, phi_group_pgl2(&ctx, p))
            }
            GroupKind::Gl2 => unreachable!("GL2 kernels do not descend"),
        };
        if let Some(prev) = seen.insert(key.clone(), v.clone()) {
            if prev != v {
                bad = Some(key);
                break;
            }
        }
    }
    let mut r = rec("kernel-descent".into(), group, q, Category::Kernels);
    r.classes = Some(g.num_classes());
    r.expected = "one kernel value per characteristic key".into();
    match bad {
        None => r.computed = format!("{} keys, consistent", seen.len()),
        Some(k) => fail(&mut r, format!("key {} takes two values", k)),
    }
    push(out, t0, r);
    Ok(())
}

fn group_extension_check(
    kind: GroupKind,
    group: &str,
    q: u32,
    out: &mut Report,
) -> Result<(), ConfigError> {
    let t0 = Instant::now();
    let ctx = field(q)?;
    let g = group_groupoid(kind, &ctx).map_err(gerr)?;
    let stack = stack_groupoid(kind, &ctx).map_err(gerr)?;
    let mut r = rec("group-extension".into(), group, q, Category::Extension);
    r.classes = Some(g.num_classes());
    r.expected = "stack kernel restricts to the group kernel on the open locus".into();

    let mut n_pts = 0usize;
    let mut witness = None;
    for p in group_points(kind, &ctx) {
        let e = embed(kind, &p);
        if phi_stack(kind, &ctx, &e) != phi_group(kind, &ctx, &p) {
            witness = Some(format!("point {}", p.render(&ctx)));
            break;
        }
        n_pts += 1;
    }

    // The embedded classes must be exactly the open-locus stack classes,
    // with trivial stabilizers.
    let mut embedded = std::collections::BTreeSet::new();
    if witness.is_none() {
        for c in 0..g.num_classes() {
            let e = embed(kind, g.rep(c));
            let idx = stack.action.index(&e).expect("embedded point on stack");
            let cls = stack.class_of[idx] as usize;
            if stack.aut[cls] != 1 {
                witness = Some(format!("embedded class of {} has stabilizer", e.render(&ctx)));
                break;
            }
            embedded.insert(cls);
        }
    }
    if witness.is_none() {
        let open: std::collections::BTreeSet<usize> = (0..stack.num_classes())
            .filter(|&c| in_open_locus(kind, &ctx, stack.rep(c)))
            .collect();
        if embedded != open {
            witness = Some(format!(
                "embedded classes {} != open-locus classes {}",
                embedded.len(),
                open.len()
            ));
        } else if embedded.len() != g.num_classes() {
            witness = Some("embedding merges group classes".into());
        }
    }
    match witness {
        None => {
            r.computed = format!(
                "{} points agree; {} classes embed bijectively",
                n_pts,
                g.num_classes()
            )
        }
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);
    Ok(())
}

fn pgl2_pushforward_checks(q: u32, out: &mut Report) -> Result<(), ConfigError> {
    let ctx = field(q)?;
    let g = group_groupoid(GroupKind::Pgl2, &ctx).map_err(gerr)?;

    // Group level: the PGL2 kernel is the mu_2-sum of the SL2 kernel over
    // the two square roots, zero on the twisted sector.
    let t0 = Instant::now();
    let mut r = rec(
        "mu2-group-pushforward".into(),
        "pgl2",
        q,
        Category::Pushforward,
    );
    r.classes = Some(g.num_classes());
    r.expected = "phi_PGL(x,a) = phi_SL(x,a) + phi_SL(x,-a)".into();
    let mut witness = None;
    for c in 0..g.num_classes() {
        let p = g.rep(c);
        let want = if p.alpha.sector == Sector::Twisted {
            slots_zero(ctx.p)
        } else {
            let flip = StackPoint {
                alpha: p.alpha.neg(&ctx),
                ..*p
            };
            let mut w = phi_group_sl2(&ctx, p);
            slots_add(&mut w, &phi_group_sl2(&ctx, &flip));
            w
        };
        if phi_group_pgl2(&ctx, p) != want {
            witness = Some(format!("class {}", p.render(&ctx)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} classes match", g.num_classes()),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    // Stack level, over every plain point including the boundary.
    let t0 = Instant::now();
    let mut r = rec(
        "mu2-stack-pushforward".into(),
        "pgl2",
        q,
        Category::Pushforward,
    );
    r.expected = "stack phi_PGL(x,a,b) = phi_SL(x,a,b) + phi_SL(x,-a,b)".into();
    let mut n = 0usize;
    let mut witness = None;
    for p in stack_points(GroupKind::Pgl2, &ctx) {
        if p.alpha.sector == Sector::Twisted {
            continue;
        }
        let flip = StackPoint {
            alpha: p.alpha.neg(&ctx),
            ..p
        };
        let mut want = phi_stack_sl2(&ctx, &p);
        slots_add(&mut want, &phi_stack_sl2(&ctx, &flip));
        if phi_stack_pgl2(&ctx, &p) != want {
            witness = Some(format!("point {}", p.render(&ctx)));
            break;
        }
        n += 1;
    }
    r.points = Some(n);
    match witness {
        None => r.computed = format!("{} plain points match", n),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    // The PGL2 kernel is minus the central-fiber sum of the GL2 kernel;
    // the Gauss-sum corrections cancel since sum_b alpha0(b) = 0.
    let t0 = Instant::now();
    let mut r = rec("gl2-fiber-sum".into(), "pgl2", q, Category::Pushforward);
    r.classes = Some(g.num_classes());
    r.expected = "phi_PGL(x,a) = -sum_{b != 0} phi_GL(x,a,b)".into();
    let mut witness = None;
    for c in 0..g.num_classes() {
        let p = g.rep(c);
        let mut fiber = slots_zero(ctx.p);
        for b in ctx.units() {
            let lift = StackPoint { b, ..*p };
            slots_add(&mut fiber, &phi_group_gl2(&ctx, &lift));
        }
        let want = slots_scale(fiber, -1);
        if phi_group_pgl2(&ctx, p) != want {
            witness = Some(format!("class {}", p.render(&ctx)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} classes match", g.num_classes()),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);
    Ok(())
}

fn gl2_kernel_checks(q: u32, out: &mut Report) -> Result<(), ConfigError> {
    let ctx = field(q)?;

    let t0 = Instant::now();
    let mut r = rec("group-restriction".into(), "gl2", q, Category::Kernels);
    r.expected = "stack recipe equals the group kernel on the open locus".into();
    let mut n = 0usize;
    let mut witness = None;
    for p in stack_points(GroupKind::Gl2, &ctx) {
        if !in_open_locus(GroupKind::Gl2, &ctx, &p) {
            continue;
        }
        if phi_stack_gl2(&ctx, &p) != phi_group_gl2(&ctx, &p) {
            witness = Some(format!("point {}", p.render(&ctx)));
            break;
        }
        n += 1;
    }
    r.points = Some(n);
    match witness {
        None => r.computed = format!("{} open-locus points match", n),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    let t0 = Instant::now();
    let mut r = rec("general-table".into(), "gl2", q, Category::Kernels);
    r.expected = "torus-table assembly equals the unified kernel".into();
    let ext = QuadExtCtx::new(&ctx).map_err(|e| ConfigError(e.to_string()))?;
    let g = group_groupoid(GroupKind::Gl2, &ctx).map_err(gerr)?;
    r.classes = Some(g.num_classes());
    let mut witness = None;
    for c in 0..g.num_classes() {
        let p = g.rep(c);
        if phi_group_gl2(&ctx, p) != phi_group_gl2_via_table(&ctx, &ext, p) {
            witness = Some(format!("class {}", p.render(&ctx)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} classes match", g.num_classes()),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    // Negative: two classes with the same characteristic polynomial take
    // different kernel values, so no descent to characteristic data.
    let t0 = Instant::now();
    let mut r = rec("non-descent".into(), "gl2", q, Category::Kernels);
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
    let mut diff = phi_group_gl2(&ctx, &central);
    slots_sub(&mut diff, &phi_group_gl2(&ctx, &unipotent));
    let want = slots_scale(gauss_slots(&ctx), -(ctx.q as i64));
    r.expected = format!("central minus unipotent = -q*S = {}", slots_to_cyc(ctx.p, &want));
    r.computed = slots_to_cyc(ctx.p, &diff).to_string();
    r.witness = Some("diag(1,1) vs [[1,1],[0,1]] at alpha=1, b=1".into());
    r.status = if diff == want && diff != slots_zero(ctx.p) {
        Status::Finding
    } else {
        Status::Fail
    };
    push(out, t0, r);
    Ok(())
}

fn gl2_torus_delta_check(q: u32, out: &mut Report) -> Result<(), ConfigError> {
    let t0 = Instant::now();
    let ctx = field(q)?;
    let gp = torus_stack_groupoid(GroupKind::Gl2, &ctx).map_err(gerr)?;
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
    let want = CycNum::from_int(
        ctx.p,
        4 * ctx.alpha0(ctx.from_int(-1)) * ctx.q as i64,
    );
    let mut r = rec("torus-delta".into(), "gl2", q, Category::Involutivity);
    r.classes = Some(gp.num_classes());
    r.points = Some(gp.action.points.len());
    r.expected = format!("off-diagonal Delta(z,x) = 4*alpha0(-1)*q = {}", want);
    r.computed = got.to_string();
    r.witness = Some(format!("z={} x={}", z.render(&ctx), x.render(&ctx)));
    r.status = if got == want && !got.is_zero() {
        Status::Finding
    } else {
        Status::Fail
    };
    push(out, t0, r);
    Ok(())
}

fn char2_checks(
    q: u32,
    cap: usize,
    do_inv: bool,
    do_kernels: bool,
    out: &mut Report,
) -> Result<(), ConfigError> {
    let ctx = field(q)?;
    if do_inv {
        let t0 = Instant::now();
        let gp = char2_groupoid(&ctx, false).map_err(gerr)?;
        let scale = (q as i64).pow(5);
        let inv = check_involutive(
            &gp,
            ctx.p,
            char2_kernel(&ctx),
            scale,
            None,
            cap,
            |p| p.render(&ctx),
        )
        .map_err(gerr)?;
        let mut r = rec(
            "stack-involutivity".into(),
            "gl2-char2",
            q,
            Category::Involutivity,
        );
        r.expected = format!("F^2 = {}*id", scale);
        r.classes = Some(inv.classes);
        r.points = Some(inv.points);
        if inv.ok {
            r.computed = r.expected.clone();
        } else {
            let w = inv.witness.expect("failed check carries a witness");
            fail(
                &mut r,
                format!("z={} x={} got={} want={}", w.z, w.x, w.got, w.want),
            );
        }
        push(out, t0, r);
    }
    if do_kernels {
        let t0 = Instant::now();
        let mut r = rec("group-restriction".into(), "gl2-char2", q, Category::Kernels);
        r.expected = "stack recipe equals the group kernel on the open locus".into();
        let mut n = 0usize;
        let mut witness = None;
        for p in char2_points(&ctx) {
            if p.x.det(&ctx).0 == 0 || p.b.0 == 0 {
                continue;
            }
            if phi_char2_stack(&ctx, &p) != phi_char2_group(&ctx, &p) {
                witness = Some(format!("point {}", p.render(&ctx)));
                break;
            }
            n += 1;
        }
        r.points = Some(n);
        match witness {
            None => r.computed = format!("{} open-locus points match", n),
            Some(w) => fail(&mut r, w),
        }
        push(out, t0, r);
    }
    Ok(())
}

fn torus_table_checks(q: u32, out: &mut Report) -> Result<(), ConfigError> {
    let ctx = field(q)?;
    let ext = QuadExtCtx::new(&ctx).map_err(|e| ConfigError(e.to_string()))?;
    for kind in [GroupKind::Sl2, GroupKind::Pgl2, GroupKind::Gl2] {
        let kname = match kind {
            GroupKind::Sl2 => "sl2",
            GroupKind::Pgl2 => "pgl2",
            GroupKind::Gl2 => "gl2",
        };
        for side in ["std", "sigma"] {
            let t0 = Instant::now();
            let rows: Vec<TorusRow> = match side {
                "std" => torus_rows_std(kind, &ctx),
                _ => torus_rows_sigma(kind, &ctx, &ext),
            };
            let mut r = rec(
                format!("{}-table-{}", side, kname),
                "torus",
                q,
                Category::Pushforward,
            );
            r.expected = "closed form equals the fiberwise pushforward on every key".into();
            match rows.iter().find(|row| row.closed != row.pushed) {
                None => r.computed = format!("{} keys match", rows.len()),
                Some(row) => fail(
                    &mut r,
                    format!(
                        "key {}: closed {} != pushed {}",
                        row.key,
                        slots_to_cyc(ctx.p, &row.closed),
                        slots_to_cyc(ctx.p, &row.pushed)
                    ),
                ),
            }
            push(out, t0, r);
        }
    }
    Ok(())
}

fn quadform_checks(cfg: &JobConfig, out: &mut Report) -> Result<(), ConfigError> {
    let grid = quad_grid(cfg);
    for &(m, q) in &grid {
        let ctx = field(q)?;
        let scalars = [ctx.one(), ctx.least_nonsquare()];

        let t0 = Instant::now();
        let mut r = rec(format!("cone-count-m{}", m), "quadform", q, Category::Quadform);
        let want = (q as u64).pow(2 * m as u32);
        r.expected = format!("{} points on the cone for either scalar", want);
        r.detail = "c = 1 and c = least nonsquare".into();
        let counts: Vec<u64> = scalars
            .iter()
            .map(|&c| QuadSpace::split_odd(m, c).cone(&ctx).len() as u64)
            .collect();
        if counts.iter().all(|&n| n == want) {
            r.computed = format!("{} points", want);
        } else {
            fail(&mut r, format!("counts {:?}", counts));
        }
        push(out, t0, r);

        for (tag, &c) in ["c1", "cns"].iter().zip(scalars.iter()) {
            let t0 = Instant::now();
            let space = QuadSpace::split_odd(m, c);
            let gp = space.cone_groupoid(&ctx).map_err(gerr)?;
            let scale = (q as i64).pow(2 * m as u32);
            let inv = check_involutive(
                &gp,
                ctx.p,
                cone_kernel(&space, &ctx),
                scale,
                None,
                cfg.matrix_cap,
                |v| space.render(&ctx, v),
            )
            .map_err(gerr)?;
            let mut r = rec(
                format!("cone-involutivity-m{}-{}", m, tag),
                "quadform",
                q,
                Category::Quadform,
            );
            r.expected = format!("F^2 = {}*id", scale);
            r.classes = Some(inv.classes);
            r.points = Some(inv.points);
            if inv.ok {
                r.computed = r.expected.clone();
            } else {
                let w = inv.witness.expect("failed check carries a witness");
                fail(
                    &mut r,
                    format!("z={} x={} got={} want={}", w.z, w.x, w.got, w.want),
                );
            }
            push(out, t0, r);
        }

        let t0 = Instant::now();
        let mut r = rec(format!("psi-transform-m{}", m), "quadform", q, Category::Quadform);
        r.expected = "cone transform of psi(B(., v)) matches the two-term closed form".into();
        let mut n = 0usize;
        let mut witness = None;
        'psi: for &c in &scalars {
            let space = QuadSpace::split_odd(m, c);
            let cone = space.cone(&ctx);
            for vp in space.vectors(&ctx) {
                if space.f_brute(&ctx, &cone, &vp) != space.f_closed(&ctx, &vp) {
                    witness = Some(format!(
                        "c={} v'={}",
                        ctx.fe_str(c),
                        space.render(&ctx, &vp)
                    ));
                    break 'psi;
                }
                n += 1;
            }
        }
        r.points = Some(n);
        match witness {
            None => r.computed = format!("{} evaluations match", n),
            Some(w) => fail(&mut r, w),
        }
        push(out, t0, r);

        let t0 = Instant::now();
        let mut r = rec(format!("weil-sum-m{}", m), "quadform", q, Category::Quadform);
        r.expected = "sum_v psi(lambda Q(v)) = q^m alpha0(c lambda) S for every unit lambda".into();
        let mut witness = None;
        'weil: for &c in &scalars {
            let space = QuadSpace::split_odd(m, c);
            for lambda in ctx.units() {
                if weil_sum(&space, &ctx, lambda) != weil_closed(&space, &ctx, lambda) {
                    witness = Some(format!("c={} lambda={}", ctx.fe_str(c), ctx.fe_str(lambda)));
                    break 'weil;
                }
            }
        }
        match witness {
            None => r.computed = format!("{} scalar/unit pairs match", 2 * (q - 1)),
            Some(w) => fail(&mut r, w),
        }
        push(out, t0, r);
    }

    // Negative: on an even-dimensional cone some off-diagonal Delta is
    // nonzero, so no scale makes the squared transform diagonal.
    let q = grid.iter().map(|&(_, q)| q).min().expect("nonempty grid");
    let t0 = Instant::now();
    let ctx = field(q)?;
    let space = QuadSpace::hyperbolic_even(1);
    let gp = space.cone_groupoid(&ctx).map_err(gerr)?;
    let kern = cone_kernel(&space, &ctx);
    let mut r = rec("even-dim-obstruction".into(), "quadform", q, Category::Quadform);
    r.classes = Some(gp.num_classes());
    r.points = Some(gp.action.points.len());
    r.expected = "some off-diagonal Delta(z,x) != 0 (no inversion at any scale)".into();
    let mut found = None;
    'scan: for cz in 0..gp.num_classes() {
        for cx in 0..gp.num_classes() {
            if cz == cx {
                continue;
            }
            let (z, x) = (gp.rep(cz), gp.rep(cx));
            let d = delta_points(&gp.action, ctx.p, &kern, z, x);
            if !d.is_zero() {
                found = Some((space.render(&ctx, z), space.render(&ctx, x), d));
                break 'scan;
            }
        }
    }
    match found {
        Some((z, x, d)) => {
            r.status = Status::Finding;
            r.computed = d.to_string();
            r.witness = Some(format!("z={} x={}", z, x));
        }
        None => {
            r.status = Status::Fail;
            r.computed = "all off-diagonal Delta vanish".into();
        }
    }
    push(out, t0, r);

    // Quadric model: three kernels on {det x = alpha^2}, all involutive at
    // scale q^4, plus the multiplicative/cone bridge.
    let mut seen = std::collections::BTreeSet::new();
    for &(_, q) in &grid {
        if q > 5 || !seen.insert(q) {
            continue;
        }
        let ctx = field(q)?;
        let gp = quadric_groupoid(&ctx).map_err(gerr)?;
        let scale = (q as i64).pow(4);
        for (name, which) in [
            ("mult", QuadricKernel::Mult),
            ("hat", QuadricKernel::Hat),
            ("cone", QuadricKernel::Cone),
        ] {
            let t0 = Instant::now();
            let inv = check_involutive(
                &gp,
                ctx.p,
                quadric_kernel(which, &ctx),
                scale,
                None,
                cfg.matrix_cap,
                |p| render_cone_pt(&ctx, p),
            )
            .map_err(gerr)?;
            let mut r = rec(
                format!("quadric-involutivity-{}", name),
                "quadform",
                q,
                Category::Quadform,
            );
            r.expected = format!("F^2 = {}*id", scale);
            r.classes = Some(inv.classes);
            r.points = Some(inv.points);
            if inv.ok {
                r.computed = r.expected.clone();
            } else {
                let w = inv.witness.expect("failed check carries a witness");
                fail(
                    &mut r,
                    format!("z={} x={} got={} want={}", w.z, w.x, w.got, w.want),
                );
            }
            push(out, t0, r);
        }

        let t0 = Instant::now();
        let mut r = rec("quadric-bridge".into(), "quadform", q, Category::Quadform);
        r.expected = "K_mult(u,v) = K_cone((adj u, -alpha_u), v)".into();
        let km = quadric_kernel(QuadricKernel::Mult, &ctx);
        let kc = quadric_kernel(QuadricKernel::Cone, &ctx);
        let pts = quadric_points(&ctx);
        r.points = Some(pts.len());
        let mut witness = None;
        'bridge: for u in &pts {
            let iu = (u.0.adj(&ctx), ctx.neg(u.1));
            for v in &pts {
                if km(u, v) != kc(&iu, v) {
                    witness = Some(format!(
                        "u={} v={}",
                        render_cone_pt(&ctx, u),
                        render_cone_pt(&ctx, v)
                    ));
                    break 'bridge;
                }
            }
        }
        match witness {
            None => r.computed = format!("{} pairs match", pts.len() * pts.len()),
            Some(w) => fail(&mut r, w),
        }
        push(out, t0, r);
    }
    Ok(())
}

fn gauss_checks(q: u32, out: &mut Report) -> Result<(), ConfigError> {
    let ctx = field(q)?;

    let t0 = Instant::now();
    let mut r = rec("char-sum".into(), "algebra", q, Category::Gauss);
    r.expected = "sum_s psi(s tau) = q-1 at tau = 0, else -1".into();
    let mut witness = None;
    for tau in ctx.elements() {
        let want = if tau.0 == 0 { ctx.q as i64 - 1 } else { -1 };
        if ctx.char_sum(tau) != want {
            witness = Some(format!("tau={}", ctx.fe_str(tau)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} values match", ctx.q),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    let t0 = Instant::now();
    let mut r = rec("gauss-square".into(), "algebra", q, Category::Gauss);
    let s = gauss_sum(&ctx);
    let want = CycNum::from_int(ctx.p, ctx.alpha0(ctx.from_int(-1)) * ctx.q as i64);
    let got = &s * &s;
    r.expected = format!("S^2 = alpha0(-1)*q = {}", want);
    r.computed = got.to_string();
    if got != want {
        r.status = Status::Fail;
    }
    push(out, t0, r);

    let t0 = Instant::now();
    let mut r = rec("gauss-twist".into(), "algebra", q, Category::Gauss);
    r.expected = "S(alpha0, psi_b) = alpha0(b)*S for every unit b".into();
    let mut witness = None;
    for b in ctx.units() {
        if gauss_sum_b(&ctx, b) != s.scale_int(ctx.alpha0(b)) {
            witness = Some(format!("b={}", ctx.fe_str(b)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} units match", ctx.q - 1),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);

    let t0 = Instant::now();
    let mut r = rec("kappa-identities".into(), "algebra", q, Category::Gauss);
    r.expected = "kappa + kappa' = -2 and kappa - kappa' = 2*S(alpha0, psi_b)".into();
    let minus_two = CycNum::from_int(ctx.p, -2);
    let mut witness = None;
    for b in ctx.units() {
        let k = kappa(&ctx, b);
        let kp = kappa_prime_base(&ctx, b);
        if &k + &kp != minus_two {
            witness = Some(format!("sum at b={}", ctx.fe_str(b)));
            break;
        }
        if &k - &kp != gauss_sum_b(&ctx, b).scale_int(2) {
            witness = Some(format!("difference at b={}", ctx.fe_str(b)));
            break;
        }
    }
    match witness {
        None => r.computed = format!("{} units match", ctx.q - 1),
        Some(w) => fail(&mut r, w),
    }
    push(out, t0, r);
    Ok(())
}

/// The stack kernel class matrix as CSV; shared by `--export-tables` and
/// the golden files.
pub fn stack_kernel_csv(kind: GroupKind, q: u32, cap: usize) -> Result<String, ConfigError> {
    let ctx = field(q)?;
    let gp = stack_groupoid(kind, &ctx).map_err(gerr)?;
    let n = gp.num_classes();
    if n > cap {
        return Err(ConfigError(format!(
            "{} classes exceed the matrix cap {}; raise it to export",
            n, cap
        )));
    }
    let header: Vec<String> = (0..n).map(|c| gp.rep(c).render(&ctx)).collect();
    let kern = stack_kernel(kind, &ctx);
    let rows: Vec<(String, Vec<String>)> = (0..n)
        .map(|z| {
            let vals = (0..n)
                .map(|x| slots_to_cyc(ctx.p, &kern(gp.rep(z), gp.rep(x))).to_string())
                .collect();
            (header[z].clone(), vals)
        })
        .collect();
    Ok(crate::report::kernel_csv(&header, &rows))
}

fn char2_kernel_csv(q: u32, cap: usize) -> Result<String, ConfigError> {
    let ctx = field(q)?;
    let gp = char2_groupoid(&ctx, false).map_err(gerr)?;
    let n = gp.num_classes();
    if n > cap {
        return Err(ConfigError(format!(
            "{} classes exceed the matrix cap {}; raise it to export",
            n, cap
        )));
    }
    let header: Vec<String> = (0..n).map(|c| gp.rep(c).render(&ctx)).collect();
    let kern = char2_kernel(&ctx);
    let rows: Vec<(String, Vec<String>)> = (0..n)
        .map(|z| {
            let vals = (0..n)
                .map(|x| slots_to_cyc(ctx.p, &kern(gp.rep(z), gp.rep(x))).to_string())
                .collect();
            (header[z].clone(), vals)
        })
        .collect();
    Ok(crate::report::kernel_csv(&header, &rows))
}

fn torus_table_csv(rows: &[TorusRow], p: u32) -> String {
    let mut out = String::new();
    for cell in ["key", "closed", "pushed"] {
        if !out.is_empty() {
            out.push(',');
        }
        out.push_str(&crate::report::csv_escape(cell));
    }
    out.push('\n');
    for row in rows {
        let line = [
            crate::report::csv_escape(&row.key),
            crate::report::csv_escape(&slots_to_cyc(p, &row.closed).to_string()),
            crate::report::csv_escape(&slots_to_cyc(p, &row.pushed).to_string()),
        ];
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn export_tables(cfg: &JobConfig, dir: &Path) -> Result<(), ConfigError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {}", dir.display(), e)))?;
    let write = |name: String, body: String| -> Result<(), ConfigError> {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| ConfigError(format!("cannot write {}: {}", path.display(), e)))
    };
    for &g in &cfg.groups {
        match g {
            GroupSel::Sl2 | GroupSel::Pgl2 => {
                let kind = match g {
                    GroupSel::Sl2 => GroupKind::Sl2,
                    _ => GroupKind::Pgl2,
                };
                for q in grid(g, cfg) {
                    let csv = stack_kernel_csv(kind, q, cfg.matrix_cap)?;
                    write(format!("{}_q{}_kernel.csv", g.name(), q), csv)?;
                }
            }
            GroupSel::Gl2Char2 => {
                for q in grid(g, cfg) {
                    let csv = char2_kernel_csv(q, cfg.matrix_cap)?;
                    write(format!("{}_q{}_kernel.csv", g.name(), q), csv)?;
                }
            }
            GroupSel::Torus => {
                for q in grid(g, cfg) {
                    let ctx = field(q)?;
                    let ext = QuadExtCtx::new(&ctx).map_err(|e| ConfigError(e.to_string()))?;
                    for kind in [GroupKind::Sl2, GroupKind::Pgl2, GroupKind::Gl2] {
                        let kname = match kind {
                            GroupKind::Sl2 => "sl2",
                            GroupKind::Pgl2 => "pgl2",
                            GroupKind::Gl2 => "gl2",
                        };
                        let std_rows = torus_rows_std(kind, &ctx);
                        write(
                            format!("torus_std_{}_q{}.csv", kname, q),
                            torus_table_csv(&std_rows, ctx.p),
                        )?;
                        let sig_rows = torus_rows_sigma(kind, &ctx, &ext);
                        write(
                            format!("torus_sigma_{}_q{}.csv", kname, q),
                            torus_table_csv(&sig_rows, ctx.p),
                        )?;
                    }
                }
            }
            GroupSel::Gl2 | GroupSel::Quadform => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(12), None);
    }

    fn cfg(groups: Vec<GroupSel>, qs: Option<Vec<u32>>) -> JobConfig {
        JobConfig {
            groups,
            qs,
            checks: Category::ALL.to_vec(),
            matrix_cap: 4096,
            stack_q_limit: 7,
            threads: 0,
            export_dir: None,
        }
    }

    #[test]
    fn validation_rejects_parity_mismatches() {
        assert!(validate(&cfg(vec![GroupSel::Gl2Char2], Some(vec![3]))).is_err());
        assert!(validate(&cfg(vec![GroupSel::Sl2], Some(vec![2]))).is_err());
        assert!(validate(&cfg(vec![GroupSel::Sl2], Some(vec![6]))).is_err());
        // q = 9 is a fine field but its stack exceeds the default size
        // limit once matrix-building checks are requested.
        assert!(validate(&cfg(vec![GroupSel::Sl2], Some(vec![9]))).is_err());
        let mut pointwise = cfg(vec![GroupSel::Sl2], Some(vec![9]));
        pointwise.checks = vec![Category::Kernels, Category::Gauss];
        assert!(validate(&pointwise).is_ok());
        let mut raised = cfg(vec![GroupSel::Sl2], Some(vec![9]));
        raised.stack_q_limit = 9;
        assert!(validate(&raised).is_ok());
        assert!(validate(&cfg(vec![GroupSel::Quadform], Some(vec![11]))).is_ok());
    }

    #[test]
    fn sl2_q3_run_is_all_green() {
        let rep = run(&cfg(vec![GroupSel::Sl2], Some(vec![3]))).unwrap();
        assert_eq!(rep.summary.failed, 0, "{}", rep.render_text());
        // involutivity (stack + t3), descent, extension, four gauss checks
        assert_eq!(rep.summary.total, 8);
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn negative_checks_surface_as_findings() {
        let mut cfg = cfg(vec![GroupSel::Gl2], Some(vec![3]));
        cfg.checks = vec![Category::Involutivity, Category::Kernels];
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.summary.failed, 0, "{}", rep.render_text());
        let ids: Vec<&str> = rep
            .records
            .iter()
            .filter(|r| r.status == Status::Finding)
            .map(|r| r.id.as_str())
            .collect();
        assert_eq!(ids, ["torus-delta", "non-descent"]);
        let delta = rep.records.iter().find(|r| r.id == "torus-delta").unwrap();
        assert_eq!(delta.computed, "[-12, 0]");
    }
}
