//! Acceptance checks: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p ktf-core --test acceptance`.

use ktf_core::characters::{enumerate_characters, DirichletCharacter};
use ktf_core::eisenstein::{enumerate_basis, eisenstein_eval, EisensteinMode};
use ktf_core::equidist::{measure_moment, moment_report_with, Measure};
use ktf_core::expsums::{
    example_p3_witness, kloosterman, permuted_classical, quad_solution_count, selberg_identity, weil_bounds,
    CountMode, IdentitySide, KloostermanMode, KloostermanQuery,
};
use ktf_core::ktf::{hecke_sigma_identity, KtfContext, KtfRequest};
use ktf_core::specfun::k_squared_integral;
use ktf_core::transforms::{
    selfdual_half_integral, v_zero, zagier_hat, SelbergPipeline, TestFunction, VZeroRoute, ZagierRoute,
};
use ktf_core::arith::{gcd, is_prime, psi};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

/// Deterministic `(a, b)` sample for modulus `c`: spread residues plus
/// the degenerate pairs with zero entries.
fn ab_sample(c: u64) -> Vec<(i64, i64)> {
    let c = c as i64;
    let mut out = vec![(0, 0), (0, 1), (1, 0), (1, 1), (c - 1, 1)];
    let mut j = 0i64;
    while out.len() < 20 {
        j += 1;
        out.push(((7 * j * j + 3 * j + 1) % c, (11 * j + 5) % c));
    }
    out
}

struct Grid1 {
    max_diff: f64,
    sums: u64,
    weil_violations: u64,
}

fn kloosterman_grid() -> ktf_core::Result<Grid1> {
    let mut g = Grid1 { max_diff: 0.0, sums: 0, weil_violations: 0 };
    for level in 1..=36u64 {
        for chi in enumerate_characters(level)? {
            for c in (level..=300).step_by(level as usize) {
                for (a, b) in ab_sample(c) {
                    for n in 1..=12i64 {
                        let q = KloostermanQuery::new(a, b, n, c, chi.clone())?;
                        let d = kloosterman(&q, KloostermanMode::Direct)?;
                        let f = kloosterman(&q, KloostermanMode::Factored)?;
                        let s = kloosterman(&q, KloostermanMode::Salie)?;
                        g.max_diff = g.max_diff.max((d - f).norm()).max((d - s).norm());
                        let (b1, b2) = weil_bounds(&q);
                        if d.norm() > b1 + 1e-9 || d.norm() > b2 + 1e-9 {
                            g.weil_violations += 1;
                        }
                        g.sums += 1;
                    }
                }
            }
        }
    }
    Ok(g)
}

fn criterion_1_2() -> (Outcome, Outcome) {
    let t0 = Instant::now();
    let g = match kloosterman_grid() {
        Ok(g) => g,
        Err(e) => {
            let o = outcome(false, format!("error: {e}"));
            return (o, outcome(false, format!("error: {e}")));
        }
    };
    let secs = t0.elapsed().as_secs_f64();
    let c1 = outcome(
        g.max_diff <= 1e-9 && secs < 300.0,
        format!("{} sums, max |direct - factored|, |direct - salie| = {:.3e}, {secs:.1} s", g.sums, g.max_diff),
    );
    let witness = (|| -> ktf_core::Result<(f64, f64, f64)> {
        let (chi, a, b) = example_p3_witness(17)?;
        let q = KloostermanQuery::new(a, b, 1, 17u64.pow(3), chi)?;
        let s = kloosterman(&q, KloostermanMode::Direct)?;
        let (b1, b2) = weil_bounds(&q);
        Ok((s.norm(), b1, b2))
    })();
    let c2 = match witness {
        Ok((s, b1, b2)) => {
            let free = 4.0 * 17f64.powf(1.5);
            outcome(
                g.weil_violations == 0 && (s - 289.0).abs() < 1e-9 && s > free && s <= b1 + 1e-9 && s <= b2 + 1e-9,
                format!(
                    "{} violations on the grid; p = 17 witness |S| = {s:.9} > 4 * 17^1.5 = {free:.4}, bounds {b1:.2}, {b2:.2}",
                    g.weil_violations
                ),
            )
        }
        Err(e) => outcome(false, format!("witness error: {e}")),
    };
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let run = (|| -> ktf_core::Result<()> {
        while done < 500 {
            let level = rng.random_range(1..=36u64);
            let chars = enumerate_characters(level)?;
            let chi = chars[rng.random_range(0..chars.len())].clone();
            let c = level * rng.random_range(1..=(300 / level));
            let a = rng.random_range(-60..=60i64);
            let b = rng.random_range(-60..=60i64);
            let n = rng.random_range(1..=60i64);
            if gcd(level as i64, n) != 1 && gcd(level as i64, b) != 1 {
                continue;
            }
            let q = KloostermanQuery::new(a, b, n, c, chi)?;
            let l = selberg_identity(&q, IdentitySide::Lhs)?;
            let r = selberg_identity(&q, IdentitySide::Rhs)?;
            worst = worst.max((l - r).norm());
            done += 1;
        }
        Ok(())
    })();
    let mut worst_perm: f64 = 0.0;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let run2 = (|| -> ktf_core::Result<()> {
        for _ in 0..500 {
            let mut args = [0i64; 3];
            for v in args.iter_mut() {
                *v = rng.random_range(1..=60i64) * if rng.random_bool(0.5) { 1 } else { -1 };
            }
            let c = rng.random_range(1..=300u64);
            let base = permuted_classical(args, perms[0], c)?;
            for p in &perms[1..] {
                worst_perm = worst_perm.max((permuted_classical(args, *p, c)? - base).norm());
            }
        }
        Ok(())
    })();
    match (run, run2) {
        (Ok(()), Ok(())) => outcome(
            worst <= 1e-9 && worst_perm <= 1e-9,
            format!("500 Selberg tuples max diff {worst:.3e}; 500 S3 tuples max diff {worst_perm:.3e}"),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0u64;
    let mut mismatches = 0u64;
    let mut with_roots = 0u64;
    let mut with_divisible = 0u64;
    for p in (2..=512u64).filter(|&p| is_prime(p)) {
        let mut n = 1u32;
        while p.pow(n) <= 512 {
            let mut triples: Vec<(i64, i64, i64)> = Vec::new();
            // small boxes reach the high p-adic valuations of the discriminant
            for a in [1i64, 2, 3, -1] {
                for bb in -6..=6i64 {
                    for c0 in -6..=6i64 {
                        triples.push((a, bb, c0));
                    }
                }
            }
            for _ in 0..300 {
                triples.push((
                    rng.random_range(-50..=50),
                    rng.random_range(-50..=50),
                    rng.random_range(-50..=50),
                ));
            }
            for (a, bb, c0) in triples {
                if a.rem_euclid(p as i64) == 0 {
                    continue;
                }
                let f = quad_solution_count(a, bb, c0, p, n, CountMode::Formula);
                let b = quad_solution_count(a, bb, c0, p, n, CountMode::Brute);
                match (f, b) {
                    (Ok(f), Ok(b)) => {
                        cases += 1;
                        if f != b {
                            mismatches += 1;
                        }
                        if b.count > 0 {
                            with_roots += 1;
                        }
                        if b.divisible > 0 {
                            with_divisible += 1;
                        }
                    }
                    _ => mismatches += 1,
                }
            }
            n += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{cases} cases ({with_roots} solvable, {with_divisible} with roots divisible by p), {mismatches} mismatches"),
    )
}

fn criterion_5() -> Outcome {
    let run = || -> ktf_core::Result<String> {
        let mut lines = Vec::new();
        let mut pass = true;
        for h in [TestFunction::gaussian(1.0)?, TestFunction::spectral_window(5.0, 1.0)?] {
            let p = SelbergPipeline::new(&h)?;
            let mut sup: f64 = 0.0;
            for i in 0..=1000 {
                let t = i as f64 * 0.01;
                sup = sup.max((p.roundtrip_h(t) - h.eval_real(t)).abs());
            }
            let a = v_zero(&h, VZeroRoute::Integral)?;
            let b = v_zero(&h, VZeroRoute::Pipeline)?;
            let vrel = (a - b).abs() / a.abs();
            let (l, r) = selfdual_half_integral(&p);
            let half = (l - r).abs();
            pass &= sup <= 1e-6 && vrel <= 1e-8 && half <= 1e-6;
            lines.push(format!("{h}: roundtrip sup {sup:.2e}, V(0) rel {vrel:.2e}, half-integral {half:.2e}"));
        }
        Ok(format!("{}{}", if pass { "" } else { "!" }, lines.join("; ")))
    };
    match run() {
        Ok(s) => match s.strip_prefix('!') {
            Some(d) => outcome(false, d.to_string()),
            None => outcome(true, s),
        },
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.5, 1.0, 2.0] {
        match k_squared_integral(t) {
            Ok(v) => {
                let want = PI / (8.0 * (PI * t).cosh());
                worst = worst.max((v - want).abs() / want);
            }
            Err(e) => return outcome(false, format!("t = {t}: {e}")),
        }
    }
    outcome(worst <= 1e-6, format!("max relative error {worst:.3e} over t in {{0, 0.5, 1, 2}}"))
}

fn criterion_7() -> Outcome {
    let run = || -> ktf_core::Result<(bool, String)> {
        let p = SelbergPipeline::new(&TestFunction::gaussian(1.0)?)?;
        let mut pass = true;
        let mut parts = Vec::new();
        for a in [0.5, 1.0, 2.0] {
            let t0 = Instant::now();
            let g = zagier_hat(&p, a, ZagierRoute::Geometric)?;
            let b = zagier_hat(&p, a, ZagierRoute::Bessel)?;
            let secs = t0.elapsed().as_secs_f64();
            let r = rel(g, b);
            pass &= r <= 1e-3 && secs < 120.0;
            parts.push(format!("a = {a}: rel {r:.2e} ({secs:.1} s)"));
        }
        Ok((pass, parts.join(", ")))
    };
    match run() {
        Ok((pass, d)) => outcome(pass, d),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_8() -> Outcome {
    let run = || -> ktf_core::Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for level in [1u64, 4, 5] {
            for omega in enumerate_characters(level)?.into_iter().filter(|w| w.parity() == 1) {
                for e in enumerate_basis(level, &omega)? {
                    for s in [0.6, 0.75, 1.0] {
                        for z in [c64(0.0, 1.0), c64(0.3, 0.8)] {
                            let d = eisenstein_eval(&e, c64(s, 0.0), z, EisensteinMode::Direct)?;
                            let f = eisenstein_eval(&e, c64(s, 0.0), z, EisensteinMode::Fourier)?;
                            worst = worst.max(rel(d, f));
                            count += 1;
                        }
                    }
                }
            }
        }
        // residue at s = 1/2 for N = 1 by a contour integral of the Fourier route
        let e = enumerate_basis(1, &DirichletCharacter::principal(1)?)?.remove(0);
        let (k, r, z) = (64, 0.1, c64(0.2, 1.1));
        let mut acc = c64(0.0, 0.0);
        for j in 0..k {
            let th = 2.0 * PI * j as f64 / k as f64;
            let ds = c64(th.cos(), th.sin()) * r;
            acc += eisenstein_eval(&e, c64(0.5, 0.0) + ds, z, EisensteinMode::Fourier)? * ds;
        }
        let res = acc / k as f64;
        let rerr = (res - 3.0 / PI).norm();
        Ok((
            worst <= 1e-6 && rerr <= 1e-8,
            format!("{count} evaluations, max relative gap {worst:.3e}; residue {:.12} vs 3/pi, error {rerr:.2e}", res.re),
        ))
    };
    match run() {
        Ok((pass, d)) => outcome(pass, d),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_9() -> Outcome {
    let run = || -> ktf_core::Result<(bool, String)> {
        let h = TestFunction::gaussian(1.0)?;
        let ms = [1u64, 2, 3, 4, 6];
        let mut worst: f64 = 0.0;
        let mut where_worst = String::new();
        let mut checks = 0;
        for level in 4..=36u64 {
            let evens: Vec<_> = enumerate_characters(level)?.into_iter().filter(|w| w.parity() == 1).collect();
            // the trivial character and one nontrivial even character, if any
            let mut omegas = vec![evens[0].clone()];
            if let Some(w) = evens.iter().find(|w| !w.is_principal()) {
                omegas.push(w.clone());
            }
            for omega in omegas {
                let ctx = KtfContext::new(level, &omega, &h)?;
                for n in (1..=10u64).filter(|n| gcd(*n as i64, level as i64) == 1) {
                    for &m1 in &ms {
                        for &m2 in &ms {
                            let cc = ctx.classical_crosscheck(n, m1, m2, 50)?;
                            checks += 1;
                            if cc.max_rel() > worst {
                                worst = cc.max_rel();
                                where_worst = format!("N={level} {} n={n} m=({m1},{m2})", omega.label());
                            }
                        }
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst_id: f64 = 0.0;
        let mut tuples = 0;
        while tuples < 200 {
            let level = rng.random_range(1..=36u64);
            let evens: Vec<_> = enumerate_characters(level)?.into_iter().filter(|w| w.parity() == 1).collect();
            let omega = &evens[rng.random_range(0..evens.len())];
            let basis = enumerate_basis(level, omega)?;
            let e = &basis[rng.random_range(0..basis.len())];
            let n = rng.random_range(1..=60u64);
            let m = rng.random_range(1..=60u64);
            if gcd((n * m) as i64, level as i64) != 1 {
                continue;
            }
            let t = rng.random_range(-5.0..5.0);
            let (l, r) = hecke_sigma_identity(n, m, e, t)?;
            worst_id = worst_id.max((l - r).norm() / (1.0 + l.norm()));
            tuples += 1;
        }
        Ok((
            worst <= 1e-8 && worst_id <= 1e-12,
            format!(
                "{checks} cross-checks, max relative delta {worst:.3e} ({where_worst}); hecke-sigma 200 tuples max {worst_id:.3e}"
            ),
        ))
    };
    match run() {
        Ok((pass, d)) => outcome(pass, d),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

const TREND_LEVELS: [u64; 3] = [101, 401, 1009];

fn criterion_10() -> Outcome {
    let run = || -> ktf_core::Result<(bool, String)> {
        let t0 = Instant::now();
        let h = TestFunction::gaussian(1.0)?;
        let mut pass = true;
        let mut parts = Vec::new();
        let mut prev = f64::INFINITY;
        for level in TREND_LEVELS {
            let omega = DirichletCharacter::principal(level)?;
            let ctx = KtfContext::new(level, &omega, &h)?;
            let req = KtfRequest::new(level, omega, 1, 1, 1, h.clone())?;
            let rep = ctx.report(&req)?;
            let ps = psi(level) as f64;
            let s1 = rep.spec_cuspidal_inferred;
            let ratio = s1.re / (ctx.j() * ps);
            let dev = (ratio - 1.0).abs();
            pass &= s1.re >= -1e-6 * ps && s1.im.abs() <= 1e-6 * ps && (0.9..=1.1).contains(&ratio) && dev <= prev;
            prev = dev;
            parts.push(format!(
                "N={level}: ratio {ratio:.6} (tail {:.1e} psi, {} terms)",
                rep.tail_bound / ps,
                rep.c_terms_used
            ));
        }
        let secs = t0.elapsed().as_secs_f64();
        pass &= secs < 600.0;
        Ok((pass, format!("{}; {secs:.1} s", parts.join(", "))))
    };
    match run() {
        Ok((pass, d)) => outcome(pass, d),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

/// Relative tolerance of the equidistribution requests: the certified
/// tail grows with `tau(n) sqrt(n)`, so `n = 2, 4` need a looser target
/// than the `n = 1` runs of criterion 10 to stay under the term cap.
const EQUIDIST_REL_TOL: f64 = 1e-2;

fn criterion_11() -> Outcome {
    let run = || -> ktf_core::Result<(bool, String)> {
        let mut ortho: f64 = 0.0;
        for i in 0..=12 {
            for j in 0..=12 {
                let want = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((measure_moment(&Measure::SatoTate, i, j) - want).abs());
            }
        }
        let h = TestFunction::gaussian(1.0)?;
        let (p, m) = (2u64, 1u64);
        let mut series: Vec<(u32, Vec<f64>)> = vec![(1, Vec::new()), (2, Vec::new())];
        for level in TREND_LEVELS {
            let omega = DirichletCharacter::principal(level)?;
            let ctx = KtfContext::new(level, &omega, &h)?;
            for (l, vals) in series.iter_mut() {
                let req = KtfRequest::new(level, omega.clone(), p.pow(*l), m, m, h.clone())?
                    .with_tolerances(1e-8, EQUIDIST_REL_TOL)?;
                let rep = moment_report_with(&ctx, &req, p, *l)?;
                vals.push(rep.ratio.norm());
            }
        }
        let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
        let pass = ortho <= 1e-10 && series.iter().all(|(_, v)| decreasing(v));
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ");
        Ok((
            pass,
            format!(
                "orthonormality max error {ortho:.1e}; |ratio| p=2, m=1, l=1: {}; l=2: {}",
                fmt(&series[0].1),
                fmt(&series[1].1)
            ),
        ))
    };
    match run() {
        Ok((pass, d)) => outcome(pass, d),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn main() {
    // `cargo test` forwards harness flags such as `--nocapture`. Numeric
    // arguments select criteria; any other filter that does not name this
    // target skips the run.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let picked: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    if picked.is_empty() && !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let wanted = |i: usize| picked.is_empty() || picked.contains(&i);
    let names = [
        "Kloosterman equivalence",
        "Weil bounds",
        "Selberg and S3 identities",
        "quadratic-congruence counts",
        "transform pipeline",
        "Bessel K_it^2 integral",
        "Zagier identity",
        "Eisenstein continuation",
        "classical cross-check",
        "KTF positivity and trend",
        "equidistribution moments",
    ];
    let runners: [fn() -> Outcome; 9] = [
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let mut outcomes: Vec<(usize, Outcome)> = Vec::new();
    if wanted(1) || wanted(2) {
        let (c1, c2) = criterion_1_2();
        outcomes.push((1, c1));
        outcomes.push((2, c2));
    }
    for (k, run) in runners.iter().enumerate() {
        if wanted(k + 3) {
            outcomes.push((k + 3, run()));
        }
    }
    let mut failed = 0;
    for (i, o) in &outcomes {
        println!("criterion {i:>2} {}: {} | {}", names[i - 1], if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
