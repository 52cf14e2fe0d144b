//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p condevo-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use condevo::superop::matrix_unit;
use condevo::*;
use condevo_cli::{compute_scenario, parse_config, run_scenario, ScenarioConfig, CSV_HEADER};

const STRONG_CFG: &str = include_str!("../presets/strong.cfg");
const WEAK_CFG: &str = include_str!("../presets/weak.cfg");

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

fn strong_preset(d: usize) -> Params {
    Params::new(C64::new(0.7, 0.0), 0.5, 2.0, 0.1, 1.0, dim(d)).unwrap()
}

fn weak_preset(d: usize) -> Params {
    Params::new(C64::new(0.7, 0.0), 0.5, 2.0, 0.0, 0.01, dim(d)).unwrap()
}

/// Times `t = τ/|Ω|` for `points` evenly spaced Ωτ in `[0, tau_max]`.
fn times(p: &Params, tau_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| tau_max * k as f64 / (points - 1) as f64 / p.omega_abs()).collect()
}

fn states(d: Dimension) -> Vec<Density> {
    let mut v = vec![mixed_state(d)];
    v.extend((0..d.get()).map(|n| fock_state(d, n).unwrap()));
    v
}

fn raw_trace(m: &Superop, rho: &Density) -> f64 {
    m.apply(rho.matrix()).unwrap().trace().re
}

fn su11_algebra() -> Outcome {
    use Elementary::*;
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in 2..=8 {
        let el = |k| elementary::<f64>(k, dim(d));
        let (k0, kp, km, n) = (el(K0), el(KPlus), el(KMinus), el(N));
        let zero = Superop::zeros(dim(d));
        let relations = [
            (commutator(&km, &kp).unwrap(), k0.scale_real(2.0)),
            (commutator(&k0, &kp).unwrap(), kp.clone()),
            (commutator(&k0, &km).unwrap(), -&km),
            (commutator(&k0, &n).unwrap(), zero.clone()),
            (commutator(&kp, &n).unwrap(), zero.clone()),
            (commutator(&km, &n).unwrap(), zero),
        ];
        for (lhs, rhs) in &relations {
            for m in 0..d - 1 {
                for q in 0..d - 1 {
                    worst = worst.max(max_abs_diff(&lhs.apply_unit(m, q), &rhs.apply_unit(m, q)));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max error {worst:.2e} (tol 1e-12), {elapsed:.2?} (limit 1 s)"),
    )
}

fn casimir_value() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=8 {
        let c = casimir::<f64>(dim(d));
        for n in 0..=d - 2 {
            let want = matrix_unit::<f64>(dim(d), n, n) * C64::new(-0.25, 0.0);
            worst = worst.max(max_abs_diff(&c.apply_unit(n, n), &want));
        }
    }
    outcome(worst <= 1e-13, format!("max |C E_nn + E_nn/4| = {worst:.2e} (tol 1e-13)"))
}

fn probability_conservation() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for preset in [strong_preset, weak_preset] {
        for d in [2, 4, 6] {
            let p = preset(d);
            let solver = ExactSolver::new(&p).unwrap();
            let rhos = states(p.d);
            for t in times(&p, 50.0, 501) {
                for m in solver.propagate_both(t).unwrap() {
                    for rho in &rhos {
                        worst = worst.max((raw_trace(&m.m_g, rho) + raw_trace(&m.m_e, rho) - 1.0).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("max |P_g + P_e - 1| = {worst:.2e} (tol 1e-9), {elapsed:.2?} (limit 5 s)"),
    )
}

fn weak_zero_order_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=6 {
        let p = weak_preset(d).with_gammas(0.0, 0.0);
        for t in times(&p, 50.0, 20) {
            for prepared in Atom::BOTH {
                let w = weak_zero_order(&p, prepared, t).unwrap();
                worst = worst.max(w.max_abs_diff(&exact_conditional(&p, prepared, t).unwrap()));
            }
        }
    }
    outcome(worst <= 1e-8, format!("max superoperator entry error {worst:.2e} (tol 1e-8)"))
}

fn one_photon_closed_form() -> Outcome {
    let p = weak_preset(2).with_gammas(0.0, 0.0);
    let alpha = derived_constants(&p).unwrap().alpha;
    let rho = fock_state::<f64>(p.d, 1).unwrap();
    let (mut exact, mut weak) = (0.0f64, 0.0f64);
    for t in times(&p, 50.0, 501) {
        let want = 0.5 * (1.0 - (-2.0 * alpha * t).exp());
        exact = exact.max((raw_trace(&exact_conditional(&p, Atom::G, t).unwrap().m_e, &rho) - want).abs());
        weak = weak.max((raw_trace(&weak_zero_order(&p, Atom::G, t).unwrap().m_e, &rho) - want).abs());
    }
    outcome(exact.max(weak) <= 1e-8, format!("max error exact {exact:.2e}, weak zero order {weak:.2e} (tol 1e-8)"))
}

/// Largest entry of `M_r ρ` minus its exact counterpart, over both outcomes
/// and the whole grid, plus the same for the detection probability.
fn output_deviation(
    p: &Params,
    rho: &Density,
    ts: &[f64],
    approx: impl Fn(f64) -> condevo::Result<Propagators>,
) -> (f64, f64) {
    let solver = ExactSolver::new(p).unwrap();
    let (mut state, mut prob) = (0.0f64, 0.0f64);
    for &t in ts {
        let a = approx(t).unwrap();
        let e = solver.propagate(a.prepared, t).unwrap();
        for r in Atom::BOTH {
            let x = a.detected(r).apply(rho.matrix()).unwrap();
            let y = e.detected(r).apply(rho.matrix()).unwrap();
            state = state.max(max_abs_diff(&x, &y));
            prob = prob.max((x.trace().re - y.trace().re).abs());
        }
    }
    (state, prob)
}

fn strong_scaling() -> Outcome {
    let base = strong_preset(4);
    let rho = mixed_state::<f64>(base.d);
    let ts: Vec<f64> = (0..=500).map(|k| 5.0 / base.gamma_eg * k as f64 / 500.0).collect();
    let deviation = |p: &Params| output_deviation(p, &rho, &ts, |t| strong_perturbative(p, Atom::G, t, 1));
    let halved = Params { omega: base.omega / 2f64.sqrt(), ..base };
    let (full, half) = (deviation(&base), deviation(&halved));
    let ratio = full.0 / half.0;
    // Diagnostic: the preset keeps γ_ge fixed while ε halves. Scaling it
    // along with ε isolates the second-order remainder.
    let consistent = Params { gamma_ge: base.gamma_ge / 2.0, ..halved };
    let ratio_consistent = full.0 / deviation(&consistent).0;
    outcome(
        (2.5..=6.0).contains(&ratio),
        format!(
            "ratio {ratio:.3} (window [2.5, 6]); deviations {:.3e} -> {:.3e}; probability-only ratio {:.3}; \
             with gamma_ge halved alongside epsilon {ratio_consistent:.3}",
            full.0,
            half.0,
            full.1 / half.1
        ),
    )
}

fn weak_scaling() -> Outcome {
    let base = weak_preset(4);
    let rho = fock_state::<f64>(base.d, 3).unwrap();
    let ts = times(&base, 50.0, 501);
    let deviation = |gamma_eg: f64| {
        let p = base.with_gammas(0.0, gamma_eg);
        output_deviation(&p, &rho, &ts, |t| weak_first_order(&p, Atom::G, t, 64))
    };
    let (small, large) = (deviation(0.01), deviation(0.02));
    let ratio = large.0 / small.0;
    outcome(
        (3.0..=5.0).contains(&ratio),
        format!(
            "ratio {ratio:.3} (window [3, 5]); deviations {:.3e} -> {:.3e}; probability-only ratio {:.3}",
            small.0,
            large.0,
            large.1 / small.1
        ),
    )
}

fn secular_convergence() -> Outcome {
    let rho = fock_state::<f64>(dim(4), 1).unwrap();
    let deviation = |ratio: f64| {
        let mut p = strong_preset(4);
        p.gamma_phase = ratio * p.omega_abs();
        let grid = times(&p, 20.0, 201);
        let traj = integrate_presecular(&p, &AtomFieldState::product(Atom::G, &rho), &grid).unwrap();
        let solver = ExactSolver::new(&p).unwrap();
        grid.iter().zip(&traj).fold(0.0f64, |acc, (&t, s)| {
            let pe = raw_trace(&solver.propagate(Atom::G, t).unwrap().m_e, &rho);
            acc.max((s.ee.trace().re - pe).abs())
        })
    };
    let (ten, forty) = (deviation(10.0), deviation(40.0));
    outcome(forty < ten, format!("max |Tr rho_ee - P_e|: {ten:.3e} at Gamma/|Omega| = 10, {forty:.3e} at 40"))
}

fn complete_positivity() -> Outcome {
    let mut worst = f64::INFINITY;
    for preset in [strong_preset, weak_preset] {
        for d in 1..=6 {
            let p = preset(d);
            let solver = ExactSolver::new(&p).unwrap();
            for t in times(&p, 50.0, 20) {
                for m in solver.propagate_both(t).unwrap() {
                    for r in Atom::BOTH {
                        let eig = hermitian_eigensystem(&choi(m.detected(r))).unwrap();
                        worst = worst.min(eig.values[0]);
                    }
                }
            }
        }
    }
    outcome(worst >= -1e-8, format!("min Choi eigenvalue {worst:.2e} (floor -1e-8)"))
}

fn qualitative_curves() -> Outcome {
    let mut cfg = parse_config(STRONG_CFG).unwrap();
    cfg.method = Method::Exact;
    cfg.snapshots.clear();
    let rows = compute_scenario(&cfg).unwrap().timeseries.rows;
    let gain_up = rows.windows(2).all(|w| w[1].info_gain >= w[0].info_gain);
    let fid_down = rows.windows(2).all(|w| w[1].fidelity <= w[0].fidelity);
    let first = rows[0];
    let initial = (first.p_g, first.info_gain, first.fidelity) == (1.0, 0.0, 1.0);
    let entropy = von_neumann_entropy(&mixed_state::<f64>(dim(4))).unwrap();
    let entropy_err = (entropy - 4f64.ln()).abs();
    outcome(
        gain_up && fid_down && initial && entropy_err <= 1e-12,
        format!(
            "info gain nondecreasing {gain_up}, fidelity nonincreasing {fid_down}, \
             first row (P_g, I, F) = ({}, {}, {}), |S(mixed) - ln 4| = {entropy_err:.1e}",
            first.p_g, first.info_gain, first.fidelity
        ),
    )
}

fn csv_schema(text: &str, steps: usize) -> Result<(), String> {
    if text.contains('\r') || !text.ends_with('\n') {
        return Err("line endings".into());
    }
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err("header".into());
    }
    let mut prev = f64::NEG_INFINITY;
    let mut count = 0;
    for line in lines {
        count += 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 || !matches!(fields[5], "0" | "1") {
            return Err(format!("row {count}: {line}"));
        }
        for f in &fields[..5] {
            let mantissa = f.split('e').next().unwrap().trim_start_matches(['-', '0', '.']);
            let digits = mantissa.chars().filter(char::is_ascii_digit).count();
            if (f.parse::<f64>().is_err() && *f != "nan") || digits > 12 {
                return Err(format!("row {count}: field {f}"));
            }
        }
        let tau: f64 = fields[0].parse().unwrap();
        if tau <= prev {
            return Err(format!("row {count}: tau not increasing"));
        }
        prev = tau;
    }
    if count != steps + 1 {
        return Err(format!("{count} rows for {steps} steps"));
    }
    Ok(())
}

fn json_schema(text: &str) -> Result<(), String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let obj = v.as_object().ok_or("not an object")?;
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    if keys != ["d", "im", "re", "tau_omega"] {
        return Err(format!("keys {keys:?}"));
    }
    let d = obj["d"].as_u64().ok_or("d")? as usize;
    obj["tau_omega"].as_f64().ok_or("tau_omega")?;
    for part in ["re", "im"] {
        let rows = obj[part].as_array().ok_or(part)?;
        let square = rows.len() == d
            && rows.iter().all(|r| r.as_array().is_some_and(|r| r.len() == d && r.iter().all(|x| x.is_f64())));
        if !square {
            return Err(format!("{part} is not {d}x{d}"));
        }
    }
    Ok(())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        // the config echo names its own directory
        .filter(|(name, _)| !name.ends_with(".cfg"))
        .collect();
    out.sort();
    out
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut slowest = Duration::ZERO;
    let mut problems = Vec::new();
    for (name, text) in [("strong", STRONG_CFG), ("weak", WEAK_CFG)] {
        for d in [4, 6] {
            let cfg = parse_config(&text.replace("d = 4", &format!("d = {d}"))).unwrap();
            let mut dirs = Vec::new();
            for run in 0..2 {
                let dir = tmp.path().join(format!("{name}_d{d}_{run}"));
                let cfg = ScenarioConfig { out_prefix: dir.join(name), ..cfg.clone() };
                let start = Instant::now();
                if let Err(e) = run_scenario(&cfg) {
                    problems.push(format!("{name} d={d}: {e}"));
                    continue;
                }
                slowest = slowest.max(start.elapsed());
                dirs.push(dir);
            }
            let [a, b] = dirs.as_slice() else { continue };
            let (fa, fb) = (files(a), files(b));
            if fa != fb {
                problems.push(format!("{name} d={d}: repeat run differs"));
            }
            for (file, bytes) in &fa {
                let text = String::from_utf8_lossy(bytes);
                let check = if file.ends_with(".csv") {
                    csv_schema(&text, cfg.steps)
                } else if file.ends_with(".json") {
                    json_schema(&text)
                } else {
                    Ok(())
                };
                if let Err(e) = check {
                    problems.push(format!("{file}: {e}"));
                }
            }
        }
    }
    let elapsed_ok = slowest < Duration::from_secs(10);
    let detail = if problems.is_empty() {
        format!("presets at d = 4, 6 byte-identical and schema-conformant; slowest run {slowest:.2?} (limit 10 s)")
    } else {
        problems.join("; ")
    };
    outcome(problems.is_empty() && elapsed_ok, detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("SU(1,1) algebra on safe units", su11_algebra),
        ("Casimir value", casimir_value),
        ("probability conservation", probability_conservation),
        ("weak zero order equals exact at zero relaxation", weak_zero_order_oracle),
        ("one-photon closed form", one_photon_closed_form),
        ("strong-limit O(eps^2) scaling", strong_scaling),
        ("weak-limit O(gamma^2) scaling", weak_scaling),
        ("secular-approximation convergence", secular_convergence),
        ("complete positivity", complete_positivity),
        ("qualitative curves", qualitative_curves),
        ("reproducibility and schema", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("[{tag}] #{} {name}: {} [{:.2?}]", k + 1, o.detail, start.elapsed());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
