use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ktbill_core::dynamics::{capacity_estimate, iterate_t_billiard, Orbit, SearchPlan};
use ktbill_core::osculation::{
    affine_curvature, fifth_order_gap, is_sextactic, osculating_conic, osculating_quadric_along_curve, CurveJet,
    PlanarSectionFrame,
};
use ktbill_core::projectivity::{projectivity_residual, SamplePlan, SphereInvolutionSampler, DEVIATION_FLOOR};
use ktbill_core::reflection::{
    euclidean_billiard_reflect, finsler_reflect_concurrency, finsler_reflect_legendre, t_billiard_reflect, Hyperplane,
};
use ktbill_core::sampling::{random_unit_vector, sphere_grid};
use ktbill_core::{ConvexBody, Error, OrientedLine, Vector};

use crate::output::{indexed, num, nums, out_path, outline, Svg, Table};
use crate::{CliError, Context};

fn config_error(ctx: &Context, key: &str, message: &str) -> CliError {
    match ctx.config.line_of(key) {
        Some(line) => CliError::Config(format!("line {line}: {message}")),
        None => CliError::Config(message.to_string()),
    }
}

fn body<'a>(ctx: &'a Context, key: &str, default: &str) -> Result<&'a ConvexBody, CliError> {
    Ok(ctx.config.body(ctx.config.text(key).unwrap_or(default))?)
}

/// `T` from the config, or the unit ball of the dimension of `K`.
fn t_body(ctx: &Context, k: &ConvexBody) -> Result<ConvexBody, CliError> {
    let name = ctx.config.text("t").unwrap_or("T");
    let t = if ctx.config.body_names().any(|n| n == name) {
        ctx.config.body(name)?.clone()
    } else {
        ConvexBody::ball(k.dim(), 1.0)?
    };
    if t.dim() != k.dim() {
        return Err(config_error(ctx, "t", "K and T must have the same dimension"));
    }
    Ok(t)
}

fn vector(ctx: &Context, key: &str, dim: usize) -> Result<Vector, CliError> {
    let v = ctx
        .config
        .list(key)?
        .ok_or_else(|| CliError::Config(format!("missing experiment key `{key}`")))?;
    if v.len() != dim {
        return Err(config_error(ctx, key, &format!("`{key}` needs {dim} coordinates")));
    }
    Ok(Vector::from_vec(v))
}

fn start_line(ctx: &Context, k: &ConvexBody) -> Result<OrientedLine, CliError> {
    let p = vector(ctx, "point", k.dim())?;
    let d = vector(ctx, "direction", k.dim())?;
    OrientedLine::new(p, d).map_err(|e| config_error(ctx, "direction", &e.to_string()))
}

pub fn reflect(ctx: &Context) -> Result<(), CliError> {
    let k = body(ctx, "k", "K")?;
    let t = t_body(ctx, k)?;
    let line = start_line(ctx, k)?;
    let n = k.dim();
    let mut table = Table::new(
        ["law".to_string()]
            .into_iter()
            .chain(indexed("q", n))
            .chain(indexed("d", n)),
    );
    let mut row = |law: &str, l: &OrientedLine| {
        println!("{law}: q = {:?}, d = {:?}", nums(l.point()), nums(l.direction()));
        table.push(
            [law.to_string()]
                .into_iter()
                .chain(nums(l.point()))
                .chain(nums(l.direction()))
                .collect(),
        );
    };
    let euclid = euclidean_billiard_reflect(k, &line)?;
    row("euclidean", &euclid);
    row("t_billiard", &t_billiard_reflect(k, &t, &line)?);
    let q = euclid.point().clone();
    let h = Hyperplane::new(&k.exterior_normal(&q)?)?;
    // The T-billiard is the Finsler billiard whose indicatrix is the polar of T.
    let indicatrix = t.polar_dual()?;
    let u = line.direction() / indicatrix.gauge(line.direction())?;
    for (law, v) in [
        ("finsler_legendre", finsler_reflect_legendre(&indicatrix, &h, &u)?),
        ("finsler_concurrency", finsler_reflect_concurrency(&indicatrix, &h, &u)?),
    ] {
        row(law, &OrientedLine::new(q.clone(), v)?);
    }
    table.write(&out_path(&ctx.out, "reflect.csv")?)
}

fn orbit_table(orbit: &Orbit, dim: usize) -> Table {
    let mut table = Table::new(
        ["index".to_string()]
            .into_iter()
            .chain(indexed("q", dim))
            .chain(indexed("d", dim))
            .chain(["length".to_string(), "action".to_string()]),
    );
    let mut action = 0.0;
    for i in 0..orbit.len() {
        let length = orbit.lengths.get(i).copied();
        action += length.unwrap_or(0.0);
        table.push(
            [i.to_string()]
                .into_iter()
                .chain(nums(&orbit.points[i]))
                .chain(nums(&orbit.directions[i]))
                .chain([length.map(num).unwrap_or_default(), num(action)])
                .collect(),
        );
    }
    table
}

pub fn trace(ctx: &Context) -> Result<(), CliError> {
    let k = body(ctx, "k", "K")?;
    let t = t_body(ctx, k)?;
    let line = start_line(ctx, k)?;
    let steps = ctx.config.usize_or("steps", 20)?;
    let orbit = iterate_t_billiard(k, &t, &line, steps)?;
    println!("line: point {:?}, direction {:?}", nums(line.point()), nums(line.direction()));
    println!("bounces: {}, action {}", orbit.len(), num(orbit.action));
    if let Some(p) = orbit.period(1e-9 * k.diameter()) {
        println!("period: {p}");
    }
    orbit_table(&orbit, k.dim()).write(&out_path(&ctx.out, "orbit.csv")?)?;
    if k.dim() == 2 {
        let mut svg = Svg::new();
        svg.path(outline(k, 256), "black", true);
        let mut poly = vec![[line.point()[0], line.point()[1]]];
        poly.extend(orbit.points.iter().map(|p| [p[0], p[1]]));
        svg.path(poly, "crimson", false);
        svg.write(&out_path(&ctx.out, "trace.svg")?)?;
    }
    match orbit.status {
        ktbill_core::dynamics::OrbitStatus::Complete => Ok(()),
        ktbill_core::dynamics::OrbitStatus::Truncated { step, reason } => {
            eprintln!("orbit stopped at step {step}");
            Err(CliError::Numeric(reason))
        }
    }
}

/// `(axis, fixed)` pairs of the tested chord classes.
fn direction_classes(dim: usize, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
    if dim == 2 {
        return (0..count)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / count as f64;
                (Vector::from_vec(vec![th.cos(), th.sin()]), Vector::from_vec(vec![-th.sin(), th.cos()]))
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let axis = random_unit_vector(&mut rng, dim);
            let w = random_unit_vector(&mut rng, dim);
            let fixed = (&w - &axis * axis.dot(&w)).normalize();
            (axis, fixed)
        })
        .collect()
}

/// Least-squares `log r = log C + k log s` over residuals above the
/// rounding floor.
fn power_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, r)| *r >= DEVIATION_FLOOR)
        .map(|(s, r)| (s.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let k = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((k, (my - k * mx).exp()))
}

fn scales(ctx: &Context) -> Result<Vec<f64>, CliError> {
    let s = ctx.config.list("scales")?.unwrap_or_else(|| vec![0.3, 0.15, 0.075]);
    if s.is_empty() || s.iter().any(|x| !(*x > 0.0)) {
        return Err(config_error(ctx, "scales", "patch scales must be positive"));
    }
    Ok(s)
}

fn residuals(t: &ConvexBody, classes: &[(Vector, Vector)], scales: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
    classes
        .iter()
        .map(|(axis, fixed)| {
            let f = SphereInvolutionSampler::from_chords(t, axis, fixed)?;
            scales
                .iter()
                .map(|&scale| projectivity_residual(&f, &SamplePlan { scale, count, seed }))
                .collect()
        })
        .collect()
}

pub fn projtest(ctx: &Context) -> Result<(), CliError> {
    let name = ctx.config.text("body").unwrap_or("K");
    let t = ctx.config.body(name)?;
    let classes = direction_classes(t.dim(), ctx.config.usize_or("classes", 8)?, ctx.seed);
    let scales = scales(ctx)?;
    let count = ctx.config.usize_or("count", 16)?;
    let tol = ctx.tol_or(1e-7)?;
    let res = residuals(t, &classes, &scales, count, ctx.seed)?;
    let mut table = Table::new([
        "body",
        "direction_class",
        "patch_scale",
        "residual",
        "fitted_exponent",
        "fitted_coefficient",
    ]);
    let mut worst: f64 = 0.0;
    for (c, row) in res.iter().enumerate() {
        let pts: Vec<(f64, f64)> = scales.iter().copied().zip(row.iter().copied()).collect();
        let fit = power_fit(&pts);
        for (s, r) in &pts {
            worst = worst.max(*r);
            table.push(vec![
                name.to_string(),
                c.to_string(),
                num(*s),
                num(*r),
                fit.map(|f| num(f.0)).unwrap_or_default(),
                fit.map(|f| num(f.1)).unwrap_or_default(),
            ]);
        }
    }
    table.write(&out_path(&ctx.out, "projtest.csv")?)?;
    println!("max residual {} ({} tolerance {})", num(worst), if worst <= tol { "within" } else { "above" }, num(tol));
    Ok(())
}

fn osculating_row(curve: &CurveJet, tol: f64) -> Result<Vec<String>, Error> {
    let g = curve.local_graph()?;
    let conic = osculating_conic(curve)?;
    let gap = fifth_order_gap(curve, &conic)?;
    let (kappa, dkappa) = affine_curvature(curve)?;
    let (sextactic, _) = is_sextactic(curve, tol)?;
    let mut row = nums(&g.tangent);
    row.extend(nums(&g.normal));
    row.extend((3..=5).map(|j| num(g.normalized(j))));
    row.extend(conic.coeffs().iter().map(|c| num(*c)));
    row.extend([num(gap), num(kappa), num(dkappa), sextactic.to_string()]);
    Ok(row)
}

fn osculate_planar(ctx: &Context, k: &ConvexBody, tol: f64) -> Result<Table, CliError> {
    let curves: Vec<CurveJet> = match k.graph_germ() {
        Some(g) => vec![CurveJet::graph(g, 0.0)?],
        None => {
            let m = ctx.config.usize_or("points", 8)?;
            (0..m)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / m as f64;
                    let p = k.gauss_inverse(&Vector::from_vec(vec![th.cos(), th.sin()]))?;
                    CurveJet::boundary(k, &p)
                })
                .collect::<Result<_, Error>>()?
        }
    };
    let mut table = Table::new([
        "index", "x", "y", "tangent_x", "tangent_y", "normal_x", "normal_y", "a3", "a4", "a5", "q_xx", "q_xy", "q_yy",
        "l_x", "l_y", "c", "gap", "affine_curvature", "affine_curvature_derivative", "sextactic", "status",
    ]);
    let mut failures = 0;
    for (i, curve) in curves.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(nums(&curve.point()));
        match osculating_row(curve, tol) {
            Ok(values) => {
                row.extend(values);
                row.push("ok".into());
            }
            Err(e) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), 17));
                row.push(e.to_string());
            }
        }
        table.push(row);
    }
    if failures == curves.len() {
        return Err(CliError::Numeric(Error::DegenerateData(
            "no osculating conic could be computed".into(),
        )));
    }
    Ok(table)
}

fn osculate_spatial(ctx: &Context, k: &ConvexBody) -> Result<Table, CliError> {
    let n = k.dim();
    let frames: Vec<PlanarSectionFrame> = if k.is_germ() {
        vec![PlanarSectionFrame::standard(n)]
    } else {
        sphere_grid(n, ctx.config.usize_or("points", 8)?)
            .iter()
            .map(|u| {
                let p = k.gauss_inverse(u)?;
                let along = k.tangent_frame(&p)?.column(0).into_owned();
                PlanarSectionFrame::normal_section(k, &p, &along)
            })
            .collect::<Result<_, Error>>()?
    };
    let mut table = Table::new(
        ["index".to_string()]
            .into_iter()
            .chain(indexed("origin", n))
            .chain(indexed("e1", n))
            .chain(indexed("normal", n))
            .chain(["section_a", "section_b", "section_c"].map(String::from))
            .chain(indexed("c", n - 2))
            .chain(indexed("d", n - 2)),
    );
    for (i, frame) in frames.iter().enumerate() {
        let q = osculating_quadric_along_curve(k, frame)?;
        let mut row = vec![i.to_string()];
        row.extend(nums(frame.origin()));
        row.extend(nums(&frame.basis().column(0).into_owned()));
        row.extend(nums(&(-frame.basis().column(n - 1).into_owned())));
        row.extend(q.section.iter().map(|x| num(*x)));
        row.extend(nums(&q.c));
        row.extend(nums(&q.d));
        table.push(row);
    }
    Ok(table)
}

pub fn osculate(ctx: &Context) -> Result<(), CliError> {
    let k = body(ctx, "k", "K")?;
    let tol = ctx.tol_or(1e-6)?;
    let table = if k.dim() == 2 {
        osculate_planar(ctx, k, tol)?
    } else {
        osculate_spatial(ctx, k)?
    };
    table.write(&out_path(&ctx.out, "osculate.csv")?)
}

pub fn capacity(ctx: &Context) -> Result<(), CliError> {
    let k = body(ctx, "k", "K")?;
    let t = t_body(ctx, k)?;
    let plan = SearchPlan {
        multistarts: ctx.config.usize_or("multistarts", 32)?,
        seed: ctx.seed,
        max_iterations: ctx.config.usize_or("max_iterations", 500)?,
        tolerance: ctx.tol_or(1e-8)?,
    };
    let m_max = ctx.config.usize_or("m_max", 4)?;
    let report = capacity_estimate(k, &t, m_max, &plan)?;
    let mut table = Table::new(["m", "action", "stationarity", "converged"]);
    let mut best: Option<&Orbit> = None;
    for (m, found) in &report.rows {
        match found {
            Some(c) => {
                table.push(vec![m.to_string(), num(c.orbit.action), num(c.stationarity), c.converged.to_string()]);
                if c.converged && best.is_none_or(|b| c.orbit.action < b.action) {
                    best = Some(&c.orbit);
                }
            }
            None => table.push(vec![m.to_string(), String::new(), String::new(), "false".into()]),
        }
    }
    table.write(&out_path(&ctx.out, "capacity.csv")?)?;
    if let Some(orbit) = best {
        orbit_table(orbit, k.dim()).write(&out_path(&ctx.out, "orbit.csv")?)?;
    }
    println!("capacity {:.4}", report.value);
    Ok(())
}

pub fn sweep(ctx: &Context) -> Result<(), CliError> {
    let semi = ctx.config.list("semi_axes")?.unwrap_or_else(|| vec![1.0, 1.0]);
    let exponent = ctx.config.f64_or("exponent", 4.0)?;
    let weights = match ctx.config.list("weights")? {
        Some(w) => w,
        None => {
            let steps = ctx.config.usize_or("steps", 10)?.max(1);
            (0..=steps).map(|i| i as f64 / steps as f64).collect()
        }
    };
    let scale = ctx.config.f64_or("scale", 0.3)?;
    let count = ctx.config.usize_or("count", 16)?;
    let classes = direction_classes(semi.len(), ctx.config.usize_or("classes", 4)?, ctx.seed);
    let mut table = Table::new(["weight", "residual"]);
    let mut curve = Vec::new();
    for &w in &weights {
        let body = ConvexBody::blend(&semi, exponent, w).map_err(|e| config_error(ctx, "weights", &e.to_string()))?;
        let r = residuals(&body, &classes, &[scale], count, ctx.seed)?
            .iter()
            .flatten()
            .fold(0.0f64, |a, b| a.max(*b));
        table.push(vec![num(w), num(r)]);
        curve.push([w, r.max(DEVIATION_FLOOR).log10() / 16.0]);
    }
    table.write(&out_path(&ctx.out, "sweep.csv")?)?;
    let mut svg = Svg::new();
    svg.path(vec![[0.0, 0.0], [1.0, 0.0]], "gray", false);
    svg.path(vec![[0.0, -1.0], [0.0, 0.0]], "gray", false);
    svg.path(curve, "navy", false);
    svg.write(&out_path(&ctx.out, "sweep.svg")?)
}
