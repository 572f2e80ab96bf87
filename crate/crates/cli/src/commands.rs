use clockforge::adiabatic::{fidelity_ladder, gap_profile, min_swing_gap, ScheduleSpec, Section};
use clockforge::feynman::{
    basis_input, build_propagation, cesaro_success, history_state, Circuit, Success,
};
use clockforge::fit::{fit_exponent, PowerFit};
use clockforge::idling::{
    canonical_paths, done_overlap, enumerate_legal_states, extra_for_half, gap_check, IdlingSpec,
};
use clockforge::kitaev::{
    block_lower_bound, full_cross_check, history_energy, rejecting_block_floor, toy_verifier,
};
use clockforge::linalg::SymTridiagonal;
use clockforge::multicog::{
    build_multicog, compare_with_walk, full_indices, multicog_states, sector_minima,
    surfer_cycle_legal, surfer_line_legal, timestep_count, CogMode, LegalCheck, MAX_FULL_QUTRITS,
};
use clockforge::spin::restrict;
use clockforge::tuning::{sector_spectrum_study, Strength, TuningSpec};
use clockforge::walk::{
    analytic_spectrum, biased_ground_state, biased_walk, build_walk_matrix,
    expected_hyperbolic_count, laplacian_walk, numeric_spectrum, Mode, WalkSpec, ROOT_TOL,
};
use serde_json::{json, Value};
use std::f64::consts::PI;

use crate::args::{CommandKind, Family, Params};
use crate::output::{Cell, Claim, Outcome, Table};
use crate::CliError;

/// Largest `(N + 1) 2^d` for which the toy verifier is also diagonalized in full.
const KITAEV_FULL_LIMIT: usize = 2048;

pub fn run(kind: CommandKind, p: &Params) -> Result<Outcome, CliError> {
    match kind {
        CommandKind::Spectrum => spectrum(p),
        CommandKind::GapScan => gap_scan(p),
        CommandKind::Biased => biased(p),
        CommandKind::Feynman => feynman(p),
        CommandKind::Kitaev => kitaev(p),
        CommandKind::Adiabatic => adiabatic(p),
        CommandKind::Idling => idling(p),
        CommandKind::Multicog => multicog(p),
        CommandKind::Tune => tune(p),
    }
}

fn usage<T>(flag: &str, msg: impl std::fmt::Display) -> Result<T, CliError> {
    Err(CliError::usage(flag, msg))
}

fn walk_spec(n: usize, left: f64, right: f64) -> Result<WalkSpec, CliError> {
    WalkSpec::new(n, left, right).map_err(|e| CliError::usage("--n/--left/--right", e.to_string()))
}

fn tol(p: &Params) -> Result<f64, CliError> {
    match p.tol {
        None => Ok(ROOT_TOL),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => usage("--tol", format!("{t} must be positive")),
    }
}

fn fit_json(sizes: &[usize], values: &[f64]) -> Result<Option<PowerFit>, CliError> {
    if sizes.len() < 2 {
        return Ok(None);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    Ok(Some(fit_exponent(&xs, values)?))
}

fn exponent_claim(
    claims: &mut Vec<Claim>,
    what: &str,
    fit: Option<&PowerFit>,
    sizes: usize,
    want: f64,
    slack: f64,
) {
    if let (Some(f), true) = (fit, sizes >= 3) {
        claims.push(Claim::new(
            format!("{what} exponent is {want} ± {slack}"),
            (f.exponent - want).abs() <= slack,
            format!("fitted {:.6}", f.exponent),
        ));
    }
}

fn gap(m: &SymTridiagonal) -> Result<f64, CliError> {
    let e = m.eigenvalues()?;
    Ok(e[1] - e[0])
}

fn mode_json(m: &Mode) -> Value {
    match m {
        Mode::Goniometric(g) => {
            json!({"kind": "goniometric", "energy": g.energy, "momentum": g.momentum})
        }
        Mode::Hyperbolic(h) => json!({
            "kind": if h.staggered { "staggered" } else { "hyperbolic" },
            "energy": h.energy,
            "rate": h.rate,
        }),
    }
}

fn mode_kind(m: &Mode) -> &'static str {
    match m {
        Mode::Goniometric(_) => "goniometric",
        Mode::Hyperbolic(h) if h.staggered => "staggered",
        Mode::Hyperbolic(_) => "hyperbolic",
    }
}

fn spectrum(p: &Params) -> Result<Outcome, CliError> {
    let n = p.single_size()?;
    let spec = walk_spec(n, p.left.unwrap_or(0.0), p.right.unwrap_or(0.0))?;
    let tol = tol(p)?;
    let a = analytic_spectrum(&spec, tol)?;
    let b = numeric_spectrum(&build_walk_matrix(&spec))?;
    let (ea, eb) = (a.eigenvalues(), b.eigenvalues());
    let dev = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let hyp = a.hyperbolic().len();
    let want = expected_hyperbolic_count(spec.left, spec.right);
    let claims = vec![
        Claim::new(
            "analytic and numeric spectra agree to 1e-8",
            dev <= 1e-8,
            format!("max deviation {dev:.3e}"),
        ),
        Claim::new(
            "hyperbolic mode count matches the case table",
            hyp == want,
            format!("{hyp} below -2, table {want}"),
        ),
    ];
    let mut table = Table::new(&["k", "energy", "numeric_energy", "kind"]);
    for (k, m) in a.modes.iter().enumerate() {
        table.push(vec![
            Cell::Int(k as u64),
            Cell::Float(m.energy()),
            Cell::Float(eb[k]),
            Cell::Text(mode_kind(m).into()),
        ]);
    }
    let json = json!({
        "n": n,
        "left": spec.left,
        "right": spec.right,
        "method": a.method,
        "eigenvalues": ea,
        "numeric_eigenvalues": eb,
        "modes": a.modes.iter().map(mode_json).collect::<Vec<_>>(),
        "gap": a.gap(),
        "max_deviation": dev,
        "hyperbolic_count": hyp,
        "expected_hyperbolic_count": want,
    });
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}

fn gap_scan(p: &Params) -> Result<Outcome, CliError> {
    let sizes = p.sizes()?;
    let family = p.family.unwrap_or(Family::Laplacian);
    let mut gaps = Vec::new();
    for &n in &sizes {
        let m = match family {
            Family::Laplacian => {
                laplacian_walk(n).map_err(|e| CliError::usage("--n", e.to_string()))?
            }
            Family::Free => build_walk_matrix(&walk_spec(n, 0.0, 0.0)?),
            Family::Loops => build_walk_matrix(&walk_spec(
                n,
                p.left.unwrap_or(0.0),
                p.right.unwrap_or(0.0),
            )?),
            Family::Biased => {
                let b = p
                    .bias
                    .ok_or_else(|| CliError::usage("--bias", "required for the biased family"))?;
                biased_walk(n, b).map_err(|e| CliError::usage("--bias", e.to_string()))?
            }
        };
        gaps.push(gap(&m)?);
    }
    let fit = fit_json(&sizes, &gaps)?;
    let mut claims = Vec::new();
    if matches!(family, Family::Laplacian | Family::Free) {
        exponent_claim(&mut claims, "gap", fit.as_ref(), sizes.len(), -2.0, 0.05);
    }
    let mut table = Table::new(&["N", "gap"]);
    for (&n, &g) in sizes.iter().zip(&gaps) {
        table.push(vec![Cell::Int(n as u64), Cell::Float(g)]);
    }
    let family_name = format!("{family:?}").to_lowercase();
    let json = json!({"family": family_name, "sizes": sizes, "gaps": gaps, "fit": fit});
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}

fn biased(p: &Params) -> Result<Outcome, CliError> {
    let n = p.single_size()?;
    let b = p
        .bias
        .ok_or_else(|| CliError::usage("--bias", "required"))?;
    let h = biased_walk(n, b).map_err(|e| CliError::usage("--bias", e.to_string()))?;
    let g = biased_ground_state(n, b)?;
    let residual = h.matvec(&g).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let walk = build_walk_matrix(&walk_spec(n, 1.0 / b, b)?);
    let rewrite = h
        .diag
        .iter()
        .zip(&walk.diag)
        .map(|(x, w)| (x - (1.0 + b * b + b * w)).abs())
        .chain(h.off.iter().zip(&walk.off).map(|(x, w)| (x - b * w).abs()))
        .fold(0.0f64, f64::max);
    let gap = gap(&h)?;
    let constant = b * (b + 1.0 / b - 2.0);
    let claims = vec![
        Claim::new(
            "ground state B^x has zero energy",
            residual <= 1e-12,
            format!("max |Hg| = {residual:.3e}"),
        ),
        Claim::new(
            "operator equals (1+B^2) I + B H^(1/B,B)",
            rewrite <= 1e-12 * (1.0 + b * b),
            format!("max deviation {rewrite:.3e}"),
        ),
    ];
    let mut table = Table::new(&["x", "amplitude"]);
    for (x, &a) in g.iter().enumerate() {
        table.push(vec![Cell::Int(x as u64), Cell::Float(a)]);
    }
    let json = json!({"n": n, "bias": b, "ground_state": g, "residual": residual, "rewrite_deviation": rewrite, "gap": gap, "constant": constant});
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}

fn feynman(p: &Params) -> Result<Outcome, CliError> {
    let pad = p.pad.unwrap_or(0);
    let circuits: Vec<Circuit> = match &p.circuit {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage("--circuit", format!("{}: {e}", path.display())))?;
            vec![Circuit::from_json(&text)
                .map_err(|e| CliError::usage("--circuit", e.to_string()))?]
        }
        None => p
            .sizes()?
            .into_iter()
            .map(|n| Circuit::identity(1, n).map_err(|e| CliError::usage("--n", e.to_string())))
            .collect::<Result<_, _>>()?,
    };
    let mut claims = Vec::new();
    let mut rows = Vec::new();
    let mut table = Table::new(&[
        "N",
        "pad",
        "final_tick",
        "done",
        "done_weight",
        "history_residual",
    ]);
    for circ in &circuits {
        let n = circ.steps();
        let padded = circ
            .padded(pad)
            .map_err(|e| CliError::usage("--pad", e.to_string()))?;
        let input = basis_input(&padded, 0)?;
        let final_tick =
            cesaro_success(circ, &basis_input(circ, 0)?, Success::FinalTick, 1.0, 0)?.limit;
        let done = cesaro_success(&padded, &input, Success::AtLeast(n), 1.0, 0)?.limit;
        let hist = history_state(&padded, &input)?;
        let residual = (build_propagation(&padded)? * hist).norm();
        let weight = (1 + pad) as f64 / (n + 1 + pad) as f64;
        claims.push(Claim::new(
            format!("N={n}: history state is a zero mode"),
            residual <= 1e-12,
            format!("residual {residual:.3e}"),
        ));
        if weight >= 0.75 {
            claims.push(Claim::new(
                format!("N={n} A={pad}: limiting done probability >= 1/2"),
                done >= 0.5,
                format!("{done:.6}"),
            ));
        }
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Int(pad as u64),
            Cell::Float(final_tick),
            Cell::Float(done),
            Cell::Float(weight),
            Cell::Float(residual),
        ]);
        rows.push(json!({"n": n, "pad": pad, "final_tick": final_tick, "done": done, "done_weight": weight, "history_residual": residual}));
    }
    let sizes: Vec<usize> = circuits.iter().map(Circuit::steps).collect();
    let finals: Vec<f64> = rows
        .iter()
        .map(|r| r["final_tick"].as_f64().unwrap_or(f64::NAN))
        .collect();
    let fit = if p.circuit.is_none() {
        fit_json(&sizes, &finals)?
    } else {
        None
    };
    Ok(Outcome {
        json: json!({"runs": rows, "fit": fit}),
        table: Some(table),
        claims,
    })
}

fn kitaev(p: &Params) -> Result<Outcome, CliError> {
    let sizes = p.sizes()?;
    let d = p.d.unwrap_or(1);
    if !(1..=3).contains(&d) {
        return usage("--d", format!("{d}; toy verifiers use 1 to 3 qubits"));
    }
    let mut claims = Vec::new();
    let mut rows = Vec::new();
    let mut energies = Vec::new();
    let mut table = Table::new(&[
        "N",
        "epsilon",
        "ground_energy",
        "rejecting_floor",
        "block_vs_full",
        "yes_energy",
    ]);
    for &n in &sizes {
        let eps = 1.0 / (n * n) as f64;
        let no = toy_verifier(d, n, eps).map_err(|e| CliError::usage("--n/--d", e.to_string()))?;
        let rep = block_lower_bound(&no, eps)?;
        let ok = rep.blocks.iter().all(|b| b.lowest >= b.bound - 1e-12);
        claims.push(Claim::new(
            format!("N={n}: every block respects its lower bound"),
            ok,
            format!("ground {:.6e}", rep.ground_energy),
        ));
        let small = (n + 1) << d <= KITAEV_FULL_LIMIT;
        let (cross, yes_energy) = if small {
            let cross = full_cross_check(&no)?;
            claims.push(Claim::new(
                format!("N={n}: block spectrum equals full spectrum"),
                cross <= 1e-8,
                format!("{cross:.3e}"),
            ));
            let yes = toy_verifier(d, n, 1.0 - eps)?;
            let mut worst = 0.0f64;
            for i in yes.proper_states() {
                worst = worst.max(history_energy(&yes, &basis_input(&yes.circuit, i)?)?);
            }
            claims.push(Claim::new(
                format!("N={n}: yes-case history energy <= eps/N"),
                worst <= eps / n as f64 + 1e-14,
                format!("{worst:.6e}"),
            ));
            (Some(cross), Some(worst))
        } else {
            (None, None)
        };
        energies.push(rep.ground_energy);
        let opt = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Float);
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Float(eps),
            Cell::Float(rep.ground_energy),
            Cell::Float(rejecting_block_floor(n)),
            opt(cross),
            opt(yes_energy),
        ]);
        rows.push(json!({"n": n, "epsilon": eps, "ground_energy": rep.ground_energy, "max_acceptance": rep.max_acceptance, "block_vs_full": cross, "yes_energy": yes_energy, "blocks": rep.blocks}));
    }
    let fit = fit_json(&sizes, &energies)?;
    Ok(Outcome {
        json: json!({"d": d, "runs": rows, "fit": fit}),
        table: Some(table),
        claims,
    })
}

fn adiabatic(p: &Params) -> Result<Outcome, CliError> {
    let n = p.single_size()?;
    if n < 2 {
        return usage("--n", "the schedule needs N >= 2");
    }
    let t1 = p.t1.unwrap_or(20.0);
    if !(t1 > 0.0 && t1.is_finite()) {
        return usage("--t1", format!("{t1} must be positive"));
    }
    let ladder = p.ladder()?;
    let prof = gap_profile(&ScheduleSpec::linear(n, 1.0, 1.0)?, 201)?;
    let ramp = prof
        .iter()
        .filter(|g| g.section != Section::Swing)
        .map(|g| g.gap)
        .fold(f64::INFINITY, f64::min);
    let (s_min, swing) = min_swing_gap(n)?;
    let closed = 2.0 - 2.0 * (PI / (n + 1) as f64).cos();
    let mut fids = Vec::new();
    for &t2 in &ladder {
        let spec = ScheduleSpec::linear(n, t1, t2)
            .map_err(|e| CliError::usage("--t2-ladder", e.to_string()))?;
        fids.push(clockforge::adiabatic::integrate_schedule(&spec)?.fidelity);
    }
    let mut claims = vec![
        Claim::new(
            "ramp sections keep the gap >= 1/2",
            ramp >= 0.5,
            format!("{ramp:.6}"),
        ),
        Claim::new(
            "middle-section minimum gap is 2 - 2cos(pi/(N+1))",
            (swing - closed).abs() <= 1e-8,
            format!("{swing:.12} vs {closed:.12}"),
        ),
    ];
    if ladder.len() >= 2 {
        let increasing =
            ladder.windows(2).all(|w| w[1] > w[0]) && fids.windows(2).all(|w| w[1] > w[0]);
        claims.push(Claim::new(
            "fidelity increases along the T2 ladder",
            increasing,
            format!("{fids:?}"),
        ));
    }
    let mut table = Table::new(&["T2", "fidelity"]);
    for (&t2, &f) in ladder.iter().zip(&fids) {
        table.push(vec![Cell::Float(t2), Cell::Float(f)]);
    }
    let _ = fidelity_ladder; // same computation, kept for library users
    let json = json!({
        "n": n, "t1": t1, "min_ramp_gap": ramp, "min_swing_gap": swing, "min_swing_s": s_min,
        "closed_form": closed, "ladder": ladder, "fidelities": fids,
    });
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}

fn idling(p: &Params) -> Result<Outcome, CliError> {
    let sizes = p.sizes()?;
    let mut claims = Vec::new();
    let mut rows = Vec::new();
    let mut table = Table::new(&[
        "N",
        "C",
        "states",
        "overlap_num",
        "overlap_den",
        "path_length",
        "congestion",
        "path_bound",
        "analytic_bound",
        "numeric_gap",
    ]);
    for &n in &sizes {
        let c = p.c.unwrap_or_else(|| extra_for_half(n));
        let spec = IdlingSpec::new(n, c).map_err(|e| CliError::usage("--n/--c", e.to_string()))?;
        let g = enumerate_legal_states(&spec)?;
        let paths = canonical_paths(&g)?;
        let gap = gap_check(&g)?;
        let (num, den) = done_overlap(&spec);
        claims.push(Claim::new(
            format!("N={n} C={c}: canonical-path bound <= numeric gap"),
            paths.gap_lower_bound <= gap.numeric_gap,
            format!("{:.6e} <= {:.6e}", paths.gap_lower_bound, gap.numeric_gap),
        ));
        claims.push(Claim::new(
            format!("N={n} C={c}: (z+1)/(8zN^2) <= numeric gap"),
            gap.analytic_bound <= gap.numeric_gap,
            format!("{:.6e} <= {:.6e}", gap.analytic_bound, gap.numeric_gap),
        ));
        claims.push(Claim::new(
            format!("N={n} C={c}: zero ground energy"),
            gap.ground_energy.abs() <= 1e-8,
            format!("{:.3e}", gap.ground_energy),
        ));
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Int(c as u64),
            Cell::Int(g.len() as u64),
            Cell::Int(num),
            Cell::Int(den),
            Cell::Int(paths.max_path_length as u64),
            Cell::Float(paths.congestion),
            Cell::Float(paths.gap_lower_bound),
            Cell::Float(gap.analytic_bound),
            Cell::Float(gap.numeric_gap),
        ]);
        rows.push(json!({
            "n": n, "c": c, "states": g.len(), "overlap": format!("{num}/{den}"), "overlap_num": num, "overlap_den": den,
            "path_length": paths.max_path_length, "congestion": paths.congestion, "path_bound": paths.gap_lower_bound,
            "analytic_bound": gap.analytic_bound, "numeric_gap": gap.numeric_gap, "ground_energy": gap.ground_energy,
        }));
    }
    Ok(Outcome {
        json: json!({"runs": rows}),
        table: Some(table),
        claims,
    })
}

fn legal_json(c: &LegalCheck) -> Value {
    json!({"states": c.states, "deviation": c.deviation, "gap": c.gap, "expected_gap": c.expected_gap})
}

fn multicog(p: &Params) -> Result<Outcome, CliError> {
    let l = p.single_size()?;
    let c = p.c.unwrap_or(1);
    if l < 2 || c < 1 {
        return usage("--n/--c", "need a cog length L >= 2 and at least one cog");
    }
    let mut claims = Vec::new();
    let mut table = Table::new(&["mode", "states", "gap", "expected_gap", "deviation"]);
    let mut push = |name: &str, chk: &LegalCheck, claims: &mut Vec<Claim>| {
        claims.push(Claim::new(
            format!("{name}: legal restriction is the walk Laplacian"),
            chk.deviation == 0.0 && (chk.gap - chk.expected_gap).abs() <= 1e-12,
            format!("deviation {}, gap {:.12}", chk.deviation, chk.gap),
        ));
        table.push(vec![
            Cell::Text(name.into()),
            Cell::Int(chk.states as u64),
            Cell::Float(chk.gap),
            Cell::Float(chk.expected_gap),
            Cell::Float(chk.deviation),
        ]);
    };
    let json = if c == 1 {
        let line = compare_with_walk(
            &surfer_line_legal(l).map_err(|e| CliError::usage("--n", e.to_string()))?,
            false,
        )?;
        let cycle = compare_with_walk(
            &surfer_cycle_legal(l).map_err(|e| CliError::usage("--n", e.to_string()))?,
            true,
        )?;
        push("line", &line, &mut claims);
        push("cycle", &cycle, &mut claims);
        let sectors = if l <= 7 {
            Some(sector_minima(l)?)
        } else {
            None
        };
        if let (Some(s), true) = (&sectors, l <= 5) {
            let worst = s
                .iter()
                .filter(|(k, _)| k % 2 == 0)
                .map(|(_, e)| *e)
                .fold(f64::INFINITY, f64::min);
            claims.push(Claim::new(
                "even surfer-count sectors have energy >= 0.1",
                worst >= 0.1,
                format!("{worst:.6}"),
            ));
        }
        let sectors_json = sectors.map(|s| {
            s.iter()
                .map(|(k, e)| json!({"surfers": k, "e0": e}))
                .collect::<Vec<_>>()
        });
        json!({"l": l, "c": 1, "line": legal_json(&line), "cycle": legal_json(&cycle), "sector_minima": sectors_json})
    } else {
        let steps = timestep_count(c, l);
        let mut modes = serde_json::Map::new();
        for (mode, cycle, name) in [
            (CogMode::Stopped, false, "stopped"),
            (CogMode::FreeRunning, true, "free_running"),
        ] {
            let (legal, count) = build_multicog(c, l, mode, false)
                .map_err(|e| CliError::usage("--n/--c", e.to_string()))?;
            let chk = compare_with_walk(&legal.to_dense(), cycle)?;
            if c * l <= MAX_FULL_QUTRITS {
                let (full, _) = build_multicog(c, l, mode, true)?;
                let same =
                    restrict(&full, &full_indices(&multicog_states(c, l)))? == legal.to_dense();
                claims.push(Claim::new(
                    format!("{name}: full-space restriction equals legal build"),
                    same,
                    String::new(),
                ));
            }
            claims.push(Claim::new(
                format!("{name}: (2L)^C legal states"),
                count == steps && chk.states as u64 == steps,
                format!("{count}"),
            ));
            push(name, &chk, &mut claims);
            modes.insert(name.into(), legal_json(&chk));
        }
        json!({"l": l, "c": c, "timesteps": steps, "modes": modes})
    };
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}

fn tune(p: &Params) -> Result<Outcome, CliError> {
    let sizes = p.sizes()?;
    let strength = p.strength()?;
    if let Some(&n) = sizes.iter().find(|&&n| !(3..=20).contains(&n)) {
        return usage("--n", format!("{n}; full sector studies need 3 <= N <= 20"));
    }
    let mut claims = Vec::new();
    let mut table = Table::new(&["N", "V", "z", "E_z"]);
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &n in &sizes {
        let s = sector_spectrum_study(&TuningSpec::new(n, strength.at(n))?)?;
        claims.push(Claim::new(
            format!("N={n}: uniform single excitation is the zero-energy ground state"),
            s.ground_energy.abs() <= 1e-12 && s.ground_overlap >= 1.0 - 1e-10 && s.gap > 0.0,
            format!(
                "E0 {:.3e}, overlap {:.12}",
                s.ground_energy, s.ground_overlap
            ),
        ));
        claims.push(Claim::new(
            format!("N={n}: geometric bound holds in every sector"),
            s.bound_satisfied,
            String::new(),
        ));
        for e in &s.sectors {
            table.push(vec![
                Cell::Int(n as u64),
                Cell::Float(s.v),
                Cell::Int(e.z as u64),
                Cell::Float(e.e0),
            ]);
        }
        gaps.push(s.gap);
        rows.push(json!({"n": n, "v": s.v, "gap": s.gap, "single_gap": s.single_gap, "ground_energy": s.ground_energy, "ground_overlap": s.ground_overlap, "bound_satisfied": s.bound_satisfied}));
    }
    let fit = fit_json(&sizes, &gaps)?;
    match strength {
        Strength::Cubic => exponent_claim(&mut claims, "gap", fit.as_ref(), sizes.len(), -3.0, 0.3),
        Strength::ThreeHalves => {
            exponent_claim(&mut claims, "gap", fit.as_ref(), sizes.len(), -2.0, 0.3)
        }
        Strength::Fixed(_) => {}
    }
    let bound_ok = rows.iter().all(|r| r["bound_satisfied"] == json!(true));
    let json = json!({
        "strength": strength,
        "runs": rows,
        "gap": gaps,
        "fitted_exponent": fit.map(|f| f.exponent),
        "fit": fit,
        "bound_satisfied": bound_ok,
    });
    Ok(Outcome {
        json,
        table: Some(table),
        claims,
    })
}
