//! Acceptance suite. Each test prints one `PASS`/`FAIL` line.
//!
//! Tests share a lock so the timing check is not disturbed by the others.

use std::sync::Mutex;

use faer::{Mat, Side};
use mcipdg::assembly::{
    assemble_a_h, assemble_load, assemble_mode_source, assemble_split, assemble_standard, DgParams,
    SystemMatrix,
};
use mcipdg::dg::{integral, l2_norm, seminorm_parts, DgField, Penalty};
use mcipdg::driver::{
    compare_algorithms, run_multimodes, run_standard, ErrorRow, Problem, RunConfig, SourceKind,
};
use mcipdg::linalg::factorize;
use mcipdg::mesh::build_uniform_mesh;
use mcipdg::par::{with_workers, Workers};
use mcipdg::random_field::{
    compute_kl, sample_stream, CovarianceSpec, FieldKind, GaussianSampler,
};
use mcipdg::Complex64;

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn desk(epsilon: f64, kind: FieldKind) -> RunConfig {
    let mut cfg = RunConfig {
        k: 2.0,
        lambda: 1.0,
        epsilon,
        cells_per_axis: 5,
        samples: 50,
        seed: 2024,
        ..Default::default()
    };
    cfg.field.kind = kind;
    cfg.field.correlation_length = 0.5;
    cfg
}

fn even_ratios(rows: &[ErrorRow]) -> Vec<f64> {
    [0, 2, 4]
        .iter()
        .map(|&n| rows[n + 2].l2_error / rows[n].l2_error)
        .collect()
}

fn fmt_rows(rows: &[ErrorRow]) -> String {
    rows.iter()
        .map(|r| format!("{:.2e}", r.l2_error))
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_even_pattern(id: u32, name: &str, kind: FieldKind) {
    let eps: f64 = 0.1;
    let cmp = compare_algorithms(&desk(eps, kind), 6).unwrap();
    let rows = &cmp.rows;
    let ratios = even_ratios(rows);
    let (lo, hi) = (eps * eps / 10.0, 10.0 * eps * eps);
    let in_band = ratios.iter().all(|r| (lo..=hi).contains(r));
    let drop = rows[0].l2_error / rows[6].l2_error;
    let ok = in_band && drop >= 1e3;
    report(
        id,
        name,
        ok,
        format!(
            "ratios {:.3e} {:.3e} {:.3e} in [{lo:.0e}, {hi:.0e}], drop N0->N6 {drop:.2e}; errors {}",
            ratios[0],
            ratios[1],
            ratios[2],
            fmt_rows(rows)
        ),
    );
}

#[test]
fn c01_epsilon_convergence_gaussian() {
    let _g = serial();
    check_even_pattern(1, "even-N geometric error decay, Gaussian field", FieldKind::Gaussian);
}

#[test]
fn c02_large_epsilon_robustness() {
    let _g = serial();
    let cmp = compare_algorithms(&desk(0.9, FieldKind::Gaussian), 6).unwrap();
    let rows = &cmp.rows;
    let finite = rows
        .iter()
        .all(|r| r.l2_error.is_finite() && r.dg_error.is_finite());
    let ok = finite && rows[6].l2_error < rows[0].l2_error;
    report(
        2,
        "large epsilon 0.9 stays finite and improves",
        ok,
        format!("errors {}", fmt_rows(rows)),
    );
}

#[test]
fn c03_nonsmooth_field_parity() {
    let _g = serial();
    check_even_pattern(3, "even-N geometric error decay, uniform cell field", FieldKind::Uniform);
}

#[test]
fn c04_per_sample_series() {
    let _g = serial();
    let cfg = RunConfig {
        samples: 1,
        modes: 6,
        ..desk(0.1, FieldKind::Gaussian)
    };
    let p = Problem::new(&cfg).unwrap();
    let draw = p.draw(0).unwrap();
    let exact = p.solve_standard(&draw).unwrap();
    let fact = factorize(&p.deterministic_matrix().unwrap()).unwrap();
    let modes = p.solve_modes(&fact, &draw, 6).unwrap();
    let mut psi = DgField::zeros(p.mesh());
    for (n, e) in modes.iter().enumerate() {
        psi.axpy(Complex64::new(0.1f64.powi(n as i32), 0.0), e);
    }
    let rel = l2_norm(&exact.sub(&psi), p.mesh()).unwrap() / l2_norm(&exact, p.mesh()).unwrap();
    report(
        4,
        "single-sample series matches direct solve at N=6",
        rel <= 1e-4,
        format!("relative L2 residual {rel:.3e} (limit 1e-4)"),
    );
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

#[test]
fn c05_lu_reuse_speedup() {
    let _g = serial();
    let base = RunConfig {
        cells_per_axis: 6,
        samples: 200,
        modes: 2,
        workers: 1,
        ..desk(0.1, FieldKind::Gaussian)
    };
    let std_wall = run_standard(&base).unwrap().timings.total_s;
    let ns: Vec<f64> = (0..=6).map(|n| n as f64).collect();
    let mut walls = vec![f64::INFINITY; ns.len()];
    // best of three interleaved passes, so drift in machine load hits every N alike
    for _ in 0..3 {
        for (n, best) in walls.iter_mut().enumerate() {
            let r = run_multimodes(&RunConfig { modes: n, ..base.clone() }).unwrap();
            assert_eq!(r.factorizations, 1);
            *best = best.min(r.timings.total_s);
        }
    }
    let mm_wall = walls[2];
    let r2 = r_squared(&ns, &walls);
    let ok = mm_wall <= std_wall / 3.0 && r2 >= 0.95;
    report(
        5,
        "single factorization speedup and affine cost in N",
        ok,
        format!(
            "standard {std_wall:.2}s, multimodes(N=2) {mm_wall:.2}s, speedup {:.1}, R^2 {r2:.4}, times {}",
            std_wall / mm_wall,
            walls
                .iter()
                .map(|t| format!("{t:.2}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    );
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn c06_monte_carlo_rate() {
    let _g = serial();
    let functional = |samples: usize, seed: u64| {
        let cfg = RunConfig {
            cells_per_axis: 3,
            samples,
            modes: 2,
            seed,
            ..desk(0.3, FieldKind::Gaussian)
        };
        let r = run_multimodes(&cfg).unwrap();
        let mesh = build_uniform_mesh(3).unwrap();
        integral(&r.mean, &mesh).unwrap()[0].re
    };
    let seeds: Vec<u64> = (1..=30).collect();
    let (m, m4) = (100, 400);
    let g1: Vec<f64> = seeds.iter().map(|&s| functional(m, s)).collect();
    let g4: Vec<f64> = seeds.iter().map(|&s| functional(m4, s)).collect();
    let ratio = std_dev(&g1) / std_dev(&g4);
    let ok = (1.5..=2.5).contains(&ratio);
    report(
        6,
        "cross-seed spread halves when M quadruples",
        ok,
        format!(
            "sd(M={m}) {:.3e}, sd(M={m4}) {:.3e}, ratio {ratio:.3} (band 2 +- 25%)",
            std_dev(&g1),
            std_dev(&g4)
        ),
    );
}

fn dense_real(a: &SystemMatrix) -> Mat<f64> {
    let n = a.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            m[(i, j)] = v.re;
        }
    }
    m
}

#[test]
fn c07_matrix_structure() {
    let _g = serial();
    let mesh = build_uniform_mesh(2).unwrap();
    let params = DgParams::new(2.0, 1.0, 10.0, 0.1).unwrap();
    let split = assemble_split(&mesh, &params).unwrap();
    let a = assemble_a_h(&mesh, &params).unwrap();

    let n = a.dim();
    let mut asym = 0.0f64;
    let mut recombine = 0.0f64;
    for i in 0..n {
        for (j, s) in split.hermitian.row(i) {
            asym = asym.max((s - split.hermitian.get(j, i).conj()).norm());
            let p = split.penalty.get(i, j);
            let expect = s - Complex64::i() * p;
            recombine = recombine.max((a.get(i, j) - expect).norm());
        }
    }
    let p = dense_real(&split.penalty);
    let p_norm = p.norm_l2();
    let evd = p.self_adjoint_eigen(Side::Lower).unwrap();
    let min_eig = evd.S().column_vector()[0];

    let hashes: Vec<String> = [1usize, 2, 4]
        .iter()
        .map(|&w| with_workers(Workers(w), || assemble_a_h(&mesh, &params).unwrap().content_hash()))
        .collect();
    let seeded: Vec<String> = [1u64, 99]
        .iter()
        .map(|&seed| {
            let cfg = RunConfig {
                cells_per_axis: 2,
                samples: 2,
                seed,
                ..Default::default()
            };
            run_multimodes(&cfg).unwrap().matrix_hash
        })
        .collect();
    let hash_ok = hashes.iter().chain(&seeded).all(|h| *h == hashes[0]);

    let ok = asym <= 1e-13 && min_eig >= -1e-10 * p_norm && recombine == 0.0 && hash_ok;
    report(
        7,
        "A = S - iP, S Hermitian, P PSD, stable hash",
        ok,
        format!(
            "max|S-S^H| {asym:.1e}, min eig(P) {min_eig:.3e} (|P| {p_norm:.3e}), recombination {recombine:.1e}, hash {}",
            &hashes[0][..16]
        ),
    );
}

fn max_rel_diff(a: &SystemMatrix, b: &SystemMatrix) -> f64 {
    assert_eq!(a.row_ptr(), b.row_ptr());
    assert_eq!(a.col_idx(), b.col_idx());
    let scale = a.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn c08_exactness_oracles() {
    let _g = serial();
    let (k, lambda) = (2.0, 1.0);
    let mut worst_quad = 0.0f64;
    for l in [1, 2, 3] {
        let mesh = build_uniform_mesh(l).unwrap();
        let coarse = DgParams::new(k, lambda, 10.0, 0.1).unwrap();
        let fine = coarse.with_quad_order(4);
        worst_quad = worst_quad.max(max_rel_diff(
            &assemble_a_h(&mesh, &coarse).unwrap(),
            &assemble_a_h(&mesh, &fine).unwrap(),
        ));
        let alpha: Vec<f64> = (0..mesh.num_cells()).map(|c| 1.0 + 0.05 * c as f64).collect();
        worst_quad = worst_quad.max(max_rel_diff(
            &assemble_standard(&mesh, &coarse, &alpha).unwrap(),
            &assemble_standard(&mesh, &fine, &alpha).unwrap(),
        ));
    }

    let one = build_uniform_mesh(1).unwrap();
    let a = assemble_a_h(&one, &DgParams::new(k, lambda, 10.0, 0.1).unwrap()).unwrap();
    let expect = Complex64::new(-k * k, -4.0 * k * lambda);
    let diag_err = (a.get(0, 0) - expect).norm() / expect.norm();
    let load = assemble_load(
        &one,
        |_, _| [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        2,
    )
    .unwrap();
    let moments = [1.0, 0.5, 0.5, 0.5];
    let moment_err = moments
        .iter()
        .enumerate()
        .map(|(i, m)| (load.0[i] - Complex64::new(*m, 0.0)).norm())
        .fold(0.0, f64::max);

    let mesh = build_uniform_mesh(3).unwrap();
    let linear = DgField::from_cellwise_linear(&mesh, |_, x| {
        [
            Complex64::new(1.0 + 2.0 * x[0] - x[2], 0.5 * x[1]),
            Complex64::new(-x[0] + 3.0 * x[1], 0.0),
            Complex64::new(0.25, x[0] + x[1] + x[2]),
        ]
    });
    let parts = seminorm_parts(&linear, &mesh, Penalty::new(10.0, 0.1).unwrap()).unwrap();
    let jumps = parts.j0.abs().max(parts.j1.abs());

    let ok = worst_quad <= 1e-12 && diag_err <= 1e-13 && moment_err <= 1e-13 && jumps <= 1e-12;
    report(
        8,
        "assembly matches quadrature and analytic oracles",
        ok,
        format!(
            "refined quadrature {worst_quad:.1e}, single-cell diagonal {diag_err:.1e}, moments {moment_err:.1e}, J0/J1 of continuous linear field {jumps:.1e}"
        ),
    );
}

fn max_abs(f: &DgField) -> f64 {
    f.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn c09_degenerate_identities() {
    let _g = serial();
    let cfg = RunConfig {
        cells_per_axis: 3,
        samples: 8,
        modes: 4,
        ..desk(0.0, FieldKind::Gaussian)
    };
    let std = run_standard(&cfg).unwrap();
    let mm = run_multimodes(&cfg).unwrap();
    let agree = max_abs(&std.mean.sub(&mm.mean)) / max_abs(&std.mean);
    let cmp = compare_algorithms(&cfg, 4).unwrap();
    let worst_row = cmp.rows.iter().map(|r| r.l2_error).fold(0.0, f64::max);

    let mut zero_cfg = RunConfig {
        epsilon: 0.3,
        ..cfg.clone()
    };
    zero_cfg.source.kind = SourceKind::Zero;
    let z_std = max_abs(&run_standard(&zero_cfg).unwrap().mean);
    let z_mm = run_multimodes(&zero_cfg).unwrap();
    let z_modes = z_mm.mode_means.iter().map(max_abs).fold(max_abs(&z_mm.mean), f64::max);

    let mesh = build_uniform_mesh(3).unwrap();
    let eta: Vec<f64> = (0..mesh.num_cells()).map(|c| (c as f64).sin()).collect();
    let zero = DgField::zeros(&mesh);
    let first = assemble_mode_source(&mesh, 2.0, &eta, &zero, &zero).unwrap();
    let first_max = first.0.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let ok = agree <= 1e-12 && worst_row <= 1e-10 && z_std == 0.0 && z_modes == 0.0 && first_max == 0.0;
    report(
        9,
        "degenerate inputs reduce exactly",
        ok,
        format!(
            "eps=0 standard vs multimodes {agree:.1e}, eps=0 error rows max {worst_row:.1e}, f=0 -> {z_std:.1e}/{z_modes:.1e}, zero mode source {first_max:.1e}"
        ),
    );
}

#[test]
fn c10_kl_module() {
    let _g = serial();
    let spec = CovarianceSpec::exponential(0.5).unwrap();
    let mesh4 = build_uniform_mesh(4).unwrap();
    let kl = compute_kl(&mesh4, &spec).unwrap();
    let cov = spec.matrix(&mesh4);
    let rec = kl.reconstruct(kl.len());
    let recon_err = (&rec - &cov).norm_l2() / cov.norm_l2();
    let trace: f64 = kl.eigenvalues().iter().sum();
    let trace_err = (trace - 64.0).abs() / 64.0;
    let descending = kl.eigenvalues().windows(2).all(|w| w[0] >= w[1]);

    // second moments of the two samplers on a small mesh
    let mesh = build_uniform_mesh(2).unwrap();
    let n = mesh.num_cells();
    let chol = GaussianSampler::new(&mesh, &spec).unwrap();
    let kl2 = compute_kl(&mesh, &spec).unwrap();
    let samples = 10_000;
    let mut m_chol = vec![0.0; n * n];
    let mut m_kl = vec![0.0; n * n];
    for s in 0..samples {
        let a = chol.sample_values(&mut sample_stream(11, s), false);
        let b = kl2.sample(&mesh, n, &mut sample_stream(12, s)).unwrap();
        let b: Vec<f64> = b.field.values().iter().zip(kl2.mean()).map(|(v, m)| v - m).collect();
        for i in 0..n {
            for j in 0..n {
                m_chol[i * n + j] += a[i] * a[j] / samples as f64;
                m_kl[i * n + j] += b[i] * b[j] / samples as f64;
            }
        }
    }
    let moment_gap = m_chol
        .iter()
        .zip(&m_kl)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let ok = recon_err <= 1e-10 && trace_err <= 1e-10 && descending && moment_gap <= 0.05;
    report(
        10,
        "KL reconstruction, trace and sampler agreement",
        ok,
        format!(
            "reconstruction {recon_err:.1e}, trace {trace:.12} (rel {trace_err:.1e}), max second-moment gap {moment_gap:.3}"
        ),
    );
}
