//! Acceptance gate: one PASS/FAIL line per criterion, written straight to
//! stderr so it survives the test harness's output capture.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cstar_morita::accontinuity::{verify_ac_transform, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL};
use cstar_morita::algebra::{c, operator_norm, r, ComplexMatrix, ComplexVector};
use cstar_morita::fock::{fock_norm, TensorPolynomial};
use cstar_morita::instances::{matrices_over_diagonal, random_instance};
use cstar_morita::morita::{canonical_stabilization, popescu_form, random_ball_point, MoritaContext};
use cstar_morita::representation::{intertwiner_from_map, sigma_dual, CovariantPair, Representation};
use cstar_morita::scenario::{default_campaign, run_scenario, Kind, Report, DEFAULT_SEED, DEFAULT_TRIALS};
use cstar_morita::{Correspondence, EquivalenceBimodule};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn announce(id: usize, name: &str, v: &Verdict) {
    let line = format!("{} criterion {id} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn report_for(reports: &[Report], kind: Kind) -> &Report {
    reports.iter().find(|r| r.scenario.kind == kind).expect("campaign covers every kind")
}

fn max_of(report: &Report, name: &str) -> f64 {
    report
        .trials
        .iter()
        .filter_map(|t| t.residuals.get(name))
        .chain(report.global.get(name))
        .fold(0.0, |a, b| a.max(*b))
}

fn errors(report: &Report) -> usize {
    report.trials.iter().filter(|t| t.error.is_some()).count()
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn functor(reports: &[Report]) -> Verdict {
    let rep = report_for(reports, Kind::Functor);
    let iso = max_of(rep, "isometry_gap");
    let inter = max_of(rep, "intertwining");
    let dims = max_of(rep, "dual_dim_gap");
    let time = rep.wall_time_s;
    let pass = rep.trials.len() >= 200 && errors(rep) == 0 && iso <= 1e-8 && inter <= 1e-9 && dims == 0.0 && time <= 60.0;
    Verdict::new(
        pass,
        format!(
            "{} contexts, isometry gap {iso:e}, intertwining {inter:e}, dimension gap {dims}, {time:.2}s",
            rep.trials.len()
        ),
    )
}

fn cp_lemma(reports: &[Report]) -> Verdict {
    let rep = report_for(reports, Kind::CpLemma);
    let res = max_of(rep, "cp_induction");
    let basis = max_of(rep, "commutant_dim_gap");
    let time = rep.wall_time_s;
    let pass = rep.trials.len() >= 100 && errors(rep) == 0 && res <= 1e-10 && basis == 0.0 && time <= 60.0;
    Verdict::new(pass, format!("{} instances, residual {res:e}, commutant basis gap {basis}, {time:.2}s", rep.trials.len()))
}

fn ac_transport(reports: &[Report]) -> Verdict {
    let rep = report_for(reports, Kind::AcTransform);
    let diff = max_of(rep, "projection_difference");
    let radius = max_of(rep, "spectral_radius_excess");
    let mut pass = errors(rep) == 0 && diff <= 1e-8 && radius == 0.0;
    let mut detail = format!("{} random instances, projection difference {diff:e}", rep.trials.len());

    let ctx = MoritaContext::induced(&Correspondence::standard(1), &EquivalenceBimodule::column(2)).expect("column context");
    for (t, expect_full) in [(1.0, false), (0.5, true)] {
        let f = Correspondence::standard(1);
        let pair = CovariantPair::new(&f, &Representation::scalar(1), ComplexMatrix::from_element(1, 1, r(t))).expect("scalar pair");
        match verify_ac_transform(&ctx, &pair, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL) {
            Ok(out) => {
                let ok = if expect_full {
                    out.source_full && out.target_full
                } else {
                    out.source.is_zero(1e-12) && out.target.is_zero(1e-12)
                };
                pass &= ok && out.residuals.max() <= 1e-8;
                detail += &format!(
                    "; t={t}: ranks {}/{} of {}/{}",
                    out.source.rank(),
                    out.target.rank(),
                    out.source.projection.nrows(),
                    out.target.projection.nrows()
                );
            }
            Err(e) => {
                pass = false;
                detail += &format!("; t={t}: {e}");
            }
        }
    }
    Verdict::new(pass, detail)
}

fn stabilization() -> Verdict {
    let mut worst_rr = 0.0f64;
    let mut worst_other = 0.0f64;
    let mut worst_deficit = 0.0f64;
    let mut cases = 0;
    let mut failures = Vec::new();
    let fs = [
        ("C", Correspondence::standard(1)),
        ("C2", Correspondence::standard(2)),
        ("diagonal", matrices_over_diagonal(2)),
    ];
    for (label, f) in &fs {
        for cap in [2, 3, 4] {
            match canonical_stabilization(f, cap) {
                Ok(st) => {
                    let res = st.check(3, 17 + cap as u64);
                    for (name, v) in &res.entries {
                        match name.as_str() {
                            "rr_star_minus_p0" => worst_rr = worst_rr.max(*v),
                            "w_window_rank_deficit" => worst_deficit = worst_deficit.max(*v),
                            _ => worst_other = worst_other.max(*v),
                        }
                    }
                    cases += 1;
                }
                Err(e) => failures.push(format!("{label}/{cap}: {e}")),
            }
        }
    }
    let pass = failures.is_empty() && cases == 9 && worst_rr <= 1e-12 && worst_other <= 1e-10 && worst_deficit == 0.0;
    let mut detail = format!("{cases} cases, RR*-P0 {worst_rr:e}, window residuals {worst_other:e}");
    if !failures.is_empty() {
        detail += &format!(", errors: {}", failures.join("; "));
    }
    Verdict::new(pass, detail)
}

fn reconstruction() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut failures = Vec::new();
    for d in 1..=3 {
        for h in 1..=3 {
            for cap in [2, 3, 4] {
                let g = gaussian(h, d * h, &mut rng);
                let row = &g * r(rng.random_range(0.0..=1.0) / operator_norm(&g));
                let ts: Vec<ComplexMatrix> = (0..d).map(|i| row.columns(i * h, h).into_owned()).collect();
                let outcome = canonical_stabilization(&Correspondence::standard(d), cap).and_then(|st| {
                    let pair = CovariantPair::new(&st.fock.base, &Representation::scalar(h), row.clone())?;
                    let rec = st.reconstruction_operator(&pair)?;
                    let direct = popescu_form(&ts, cap)?;
                    Ok(operator_norm(&(&rec.matrix - direct)))
                });
                match outcome {
                    Ok(v) => {
                        worst = worst.max(v);
                        cases += 1;
                    }
                    Err(e) => failures.push(format!("d={d} h={h} cap={cap}: {e}")),
                }
            }
        }
    }
    let time = start.elapsed();
    let pass = failures.is_empty() && cases == 27 && worst <= 1e-12 && time <= Duration::from_secs(30);
    let mut detail = format!("{cases} cases, max difference {worst:e}, {:.2}s", time.as_secs_f64());
    if !failures.is_empty() {
        detail += &format!(", errors: {}", failures.join("; "));
    }
    Verdict::new(pass, detail)
}

/// Round trip and multiplicativity of integrated forms on random instances.
fn representation_checks(rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize), String> {
    let mut round_trip = 0.0f64;
    let mut homomorphism = 0.0f64;
    let mut used = 0;
    for seed in 0..60u64 {
        let inst = random_instance(seed).map_err(|e| format!("instance {seed}: {e}"))?;
        let f = &inst.context.f;
        let dual = sigma_dual(f, &inst.sigma).map_err(|e| e.to_string())?;
        if dual.dim() == 0 {
            continue;
        }
        let z = random_ball_point(&dual, rng);
        let pair = CovariantPair::from_point(&dual, &z);
        let back = intertwiner_from_map(&pair.induced, &pair.bimodule_map()).map_err(|e| e.to_string())?;
        round_trip = round_trip.max(operator_norm(&(back - &pair.intertwiner)));

        let g = pair.generalized(3).map_err(|e| e.to_string())?;
        let vec_at = |k: usize, rng: &mut ChaCha8Rng| {
            let n = g.fock.levels[k].vec_dim;
            ComplexVector::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        };
        for (k1, k2) in [(1, 1), (1, 2), (2, 1)] {
            let (xi, eta) = (vec_at(k1, rng), vec_at(k2, rng));
            let joined = g.fock.tensor_vectors(k1, &xi, k2, &eta).map_err(|e| e.to_string())?;
            let lhs = g.creation_image(k1 + k2, &joined).map_err(|e| e.to_string())?;
            let rhs = g.creation_image(k1, &xi).map_err(|e| e.to_string())? * g.creation_image(k2, &eta).map_err(|e| e.to_string())?;
            homomorphism = homomorphism.max(operator_norm(&(lhs - rhs)));
        }
        // left and right coefficients: ρ(a ξ b) = σ(a) ρ(ξ) σ(b)
        let level = &g.fock.levels[1];
        for (a, b) in level.left_algebra.basis.iter().zip(level.coeff_algebra.basis.iter().rev()) {
            let xi = vec_at(1, rng);
            let moved = level.left_op(a) * level.right_op(b) * &xi;
            let lhs = g.creation_image(1, &moved).map_err(|e| e.to_string())?;
            let rhs = inst.sigma.image(a) * g.creation_image(1, &xi).map_err(|e| e.to_string())? * inst.sigma.image(b);
            homomorphism = homomorphism.max(operator_norm(&(lhs - rhs)));
        }
        used += 1;
    }
    Ok((round_trip, homomorphism, used))
}

fn representations(reports: &[Report]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 6);
    let (round_trip, homomorphism, used) = match representation_checks(&mut rng) {
        Ok(v) => v,
        Err(e) => return Verdict::new(false, format!("error: {e}")),
    };
    let norm = match fock_norm(&Correspondence::standard(1), &TensorPolynomial::scalar(&[r(1.0), r(1.0)]), 200) {
        Ok(v) => v,
        Err(e) => return Verdict::new(false, format!("fock norm: {e}")),
    };
    let disc = report_for(reports, Kind::DiscConvergence);
    let point = max_of(disc, "point_bound_excess");
    let matrix = max_of(disc, "matrix_bound_excess");
    let pass = used >= 20
        && round_trip <= 1e-10
        && homomorphism <= 1e-9
        && (1.99..=2.0).contains(&norm)
        && errors(disc) == 0
        && point <= 1e-6;
    Verdict::new(
        pass,
        format!(
            "{used} instances, round trip {round_trip:e}, homomorphism {homomorphism:e}, \
             fock norm of 1+z at 200 = {norm:.6}, von Neumann excess {point:e} (matrices {matrix:e})"
        ),
    )
}

fn determinism(first: &[Report]) -> Verdict {
    let second: Vec<Report> = match default_campaign(DEFAULT_SEED, DEFAULT_TRIALS).iter().map(run_scenario).collect() {
        Ok(v) => v,
        Err(e) => return Verdict::new(false, format!("second run: {e}")),
    };
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a.canonical() != b.canonical())
        .map(|(a, _)| a.scenario.kind.to_string())
        .collect();
    let pass = differing.is_empty() && first.len() == second.len();
    let detail = if pass {
        format!("{} kinds, machine reports identical apart from wall time", first.len())
    } else {
        format!("reports differ for {}", differing.join(", "))
    };
    Verdict::new(pass, detail)
}

#[test]
fn acceptance() {
    let campaign: Vec<Report> = default_campaign(DEFAULT_SEED, DEFAULT_TRIALS)
        .iter()
        .map(|s| run_scenario(s).expect("default scenarios are well formed"))
        .collect();

    let verdicts = [
        ("functor", functor(&campaign)),
        ("cp_induction", cp_lemma(&campaign)),
        ("ac_transport", ac_transport(&campaign)),
        ("stabilization", stabilization()),
        ("reconstruction", reconstruction()),
        ("representations", representations(&campaign)),
        ("determinism", determinism(&campaign)),
    ];
    for (i, (name, v)) in verdicts.iter().enumerate() {
        announce(i + 1, name, v);
    }
    let failed: Vec<&str> = verdicts.iter().filter(|(_, v)| !v.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
