//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use multiq_core::bundler::{bundle, first_fit, objective, BinItem, SAParams};
use multiq_core::checker::{equivalent, oracle_equiv, reconstruct, Method};
use multiq_core::estimator::fidelity;
use multiq_core::ir::{AtomState, NAInstruction, NAProgram, Site};
use multiq_core::orchestrator::{lower_u3_rows, TagKind};
use multiq_core::placer::{batch_compatible, conflict_cost, place, place_exhaustive, MoveOp, PlacerParams};
use multiq_core::{
    compile_circuit, default_hardware, load_corpus, plan_layout, rebase_to_native, run, Circuit, Gate, HardwareConfig,
    RunConfig, Tile,
};

// Pinned tolerances.
const RATIO_4: (f64, f64) = (3.0, 4.0);
const RATIO_14: (f64, f64) = (6.0, 14.0);
const MAX_FIDELITY_GAP: f64 = 0.05;
const SA_OPT_FRACTION: f64 = 0.95;
const PLACE_GAP: f64 = 0.10;
const PHASE_TOL: f64 = 1e-9;
const ROW_TOL: f64 = 1e-9;
const POINT_TOL: f64 = 1e-12;

const SET_4: [&str; 4] = ["ghz_n4", "bv_n5", "cat_n5", "dj_n5"];
const SET_14: [&str; 14] = [
    "bv_n5",
    "ghz_n4",
    "dj_n5",
    "qaoa_n4",
    "hamsim_n5",
    "graphstate_n4",
    "cat_n5",
    "knn_n5",
    "swp_n5",
    "wst_n5",
    "multiply_n8",
    "bv_n4",
    "dj_n4",
    "cat_n4",
];

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_circuits() -> Vec<Circuit> {
    let c = load_corpus(corpus_dir()).expect("corpus directory");
    assert!(c.errors.is_empty(), "{:?}", c.errors);
    c.entries.into_iter().map(|e| e.circuit.expect("parsed")).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_run(names: &[&str], out: &Path) -> Result<Value, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_multiq"));
    cmd.arg("run").arg("-o").arg(out).env_remove("MULTIQ_HW");
    if names.is_empty() {
        cmd.arg(corpus_dir());
    }
    for n in names {
        cmd.arg(corpus_dir().join(format!("{n}.qasm")));
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    ensure(o.status.success(), || format!("multiq run failed: {}", String::from_utf8_lossy(&o.stderr)))?;
    let text = std::fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn band(report: &Value, lo_hi: (f64, f64), max_bins: usize, what: &str) -> Result<String, String> {
    let ratio = report["throughput"]["ratio"].as_f64().ok_or("missing ratio")?;
    let bins = report["bins"].as_array().ok_or("missing bins")?.len();
    ensure((lo_hi.0..=lo_hi.1).contains(&ratio) && bins <= max_bins, || {
        format!("{what}: ratio {ratio:.3} in {bins} bin(s), want [{}, {}] in <= {max_bins}", lo_hi.0, lo_hi.1)
    })?;
    Ok(format!("{what}: ratio {ratio:.3} ({bins} bin)"))
}

fn c1_throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = band(&cli_run(&SET_4, &dir.path().join("four"))?, RATIO_4, 1, "4 circuits")?;
    let b = band(&cli_run(&SET_14, &dir.path().join("fourteen"))?, RATIO_14, 2, "14 circuits")?;
    Ok(format!("{a}; {b}"))
}

/// Independent form of the fidelity model.
fn fidelity_oracle(n1: u64, n2: u64, nt: u64, idle: &[f64], hw: &HardwareConfig) -> f64 {
    let mut log =
        n1 as f64 * hw.fidelity_1q.ln() + n2 as f64 * hw.fidelity_2q.ln() + nt as f64 * hw.fidelity_transfer.ln();
    for t in idle {
        log -= t / hw.t2_us;
    }
    log.exp()
}

fn c2_fidelity(hw: &HardwareConfig, circuits: &[Circuit]) -> Outcome {
    let out = run(circuits, &RunConfig::default(), hw).map_err(|e| e.to_string())?;
    let report: Value = serde_json::from_str(&out.report.to_json()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for t in report["tiles"].as_array().ok_or("missing tiles")? {
        let label = t["label"].as_str().unwrap_or("?");
        let (f, fs) = (t["fidelity"].as_f64().unwrap(), t["solo_fidelity"].as_f64().unwrap());
        let idle: Vec<f64> = t["idle_us"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let expect = fidelity_oracle(
            t["n1"].as_u64().unwrap(),
            t["n2"].as_u64().unwrap(),
            t["n_trans"].as_u64().unwrap(),
            &idle,
            hw,
        );
        ensure((f - expect).abs() <= 1e-12 * expect.max(1e-300) + 1e-15, || {
            format!("{label}: reported {f}, formula {expect}")
        })?;
        worst = worst.max((f - fs).abs());
        ensure((f - fs).abs() <= MAX_FIDELITY_GAP, || format!("{label}: |{f:.4} - {fs:.4}| > {MAX_FIDELITY_GAP}"))?;
    }
    Ok(format!("{} tiles in {} bins, max |df| = {worst:.4}", out.tiles.len(), out.bins.len()))
}

// Bundling oracle: set partitions with an independent fit rule and score.

fn span(it: &BinItem, hw: &HardwareConfig) -> f64 {
    let adv = if it.closed { it.width + hw.pair_gap_um } else { it.width };
    (adv / hw.storage_spacing_um - 1e-9).ceil() * hw.storage_spacing_um
}

fn oracle_fits(items: &[&BinItem], hw: &HardwareConfig) -> bool {
    let widths: f64 = items.iter().map(|i| i.width).sum();
    let spans: f64 = items.iter().map(|i| span(i, hw)).sum();
    let slack = items.iter().map(|i| span(i, hw) - i.width).fold(0.0, f64::max);
    widths <= hw.width_um + 1e-9 && spans - slack <= hw.width_um + 1e-9
}

fn oracle_score(items: &[BinItem], bins: &[Vec<usize>], alpha: f64, hw: &HardwareConfig) -> f64 {
    let per_bin = |b: &Vec<usize>| {
        let w: f64 = b.iter().map(|&i| items[i].width).sum();
        let t: f64 = b.iter().map(|&i| items[i].time).sum();
        let tmax = b.iter().map(|&i| items[i].time).fold(0.0, f64::max);
        alpha * (w / hw.width_um).min(1.0) + (1.0 - alpha) * t / (b.len() as f64 * tmax)
    };
    bins.iter().map(per_bin).sum::<f64>() / bins.len() as f64
}

fn partitions(n: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    fn rec(k: usize, n: usize, cur: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&[Vec<usize>])) {
        if k == n {
            f(cur);
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(k);
            rec(k + 1, n, cur, f);
            cur[b].pop();
        }
        cur.push(vec![k]);
        rec(k + 1, n, cur, f);
        cur.pop();
    }
    rec(0, n, &mut Vec::new(), f);
}

fn valid_partition(items: &[BinItem], bins: &[Vec<usize>], hw: &HardwareConfig) -> bool {
    let mut seen = vec![false; items.len()];
    for b in bins {
        for &i in b {
            if std::mem::replace(&mut seen[i], true) {
                return false;
            }
        }
        let refs: Vec<&BinItem> = b.iter().map(|&i| &items[i]).collect();
        if b.is_empty() || !oracle_fits(&refs, hw) {
            return false;
        }
    }
    seen.iter().all(|&s| s)
}

fn c3_bundler(hw: &HardwareConfig) -> Outcome {
    let params = SAParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut dominated, mut small, mut worst_frac) = (0, 0, f64::INFINITY);
    for set in 0..50 {
        let n = 6 + set % 9;
        let items: Vec<BinItem> = (0..n)
            .map(|i| BinItem {
                label: format!("t{i}"),
                width: rng.gen_range(8.0..90.0),
                time: rng.gen_range(200.0..6000.0),
                closed: rng.gen_bool(0.3),
            })
            .collect();
        let ff = first_fit(&items, hw).map_err(|e| e.to_string())?;
        let sa: Vec<Vec<usize>> =
            bundle(&items, &params, hw).map_err(|e| e.to_string())?.into_iter().map(|b| b.tiles).collect();
        ensure(valid_partition(&items, &sa, hw), || format!("set {set}: invalid SA partition {sa:?}"))?;
        let (l_ff, l_sa) = (oracle_score(&items, &ff, params.alpha, hw), oracle_score(&items, &sa, params.alpha, hw));
        ensure((objective(&items, &sa, params.alpha, hw) - l_sa).abs() < 1e-12, || {
            format!("set {set}: objective bookkeeping")
        })?;
        if l_sa >= l_ff - 1e-12 {
            dominated += 1;
        }
        if n <= 6 {
            small += 1;
            let mut best = 0.0f64;
            partitions(n, &mut |p| {
                if valid_partition(&items, p, hw) {
                    best = best.max(oracle_score(&items, p, params.alpha, hw));
                }
            });
            worst_frac = worst_frac.min(l_sa / best);
            ensure(l_sa >= SA_OPT_FRACTION * best, || format!("set {set}: SA {l_sa:.4} < 0.95 x optimum {best:.4}"))?;
        }
    }
    ensure(dominated == 50, || format!("SA >= first-fit in {dominated}/50 sets"))?;
    Ok(format!("SA >= FF in 50/50; {small} small sets, worst SA/opt = {worst_frac:.4}"))
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    let q = rng.gen_range(0..n);
    let mut a = || rng.gen_range(-PI..PI);
    let (x, y, z) = (a(), a(), a());
    let k = if n >= 2 { rng.gen_range(0..17) } else { rng.gen_range(0..14) };
    let other = |rng: &mut ChaCha8Rng| {
        let r = rng.gen_range(0..n - 1);
        if r >= q {
            r + 1
        } else {
            r
        }
    };
    match k {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Y(q),
        3 => Gate::Z(q),
        4 => Gate::S(q),
        5 => Gate::Sdg(q),
        6 => Gate::T(q),
        7 => Gate::Tdg(q),
        8 => Gate::Rx(q, x),
        9 => Gate::Ry(q, x),
        10 => Gate::Rz(q, x),
        11 => Gate::U1(q, x),
        12 => Gate::U2(q, x, y),
        13 => Gate::u3(q, x, y, z),
        14 => Gate::Cx(q, other(rng)),
        15 => Gate::Cz(q, other(rng)),
        _ => Gate::Swap(q, other(rng)),
    }
}

fn mutate(c: &Circuit, rng: &mut ChaCha8Rng) -> Circuit {
    let mut m = c.clone();
    let n = c.n_qubits;
    match rng.gen_range(0..3) {
        0 if !m.gates.is_empty() => {
            m.gates.remove(rng.gen_range(0..m.gates.len()));
        }
        1 if m.gates.iter().any(|g| matches!(g, Gate::U3 { .. })) => {
            let idx: Vec<usize> = (0..m.gates.len()).filter(|&i| matches!(m.gates[i], Gate::U3 { .. })).collect();
            let k = idx[rng.gen_range(0..idx.len())];
            let d = rng.gen_range(0.2..1.0);
            if let Gate::U3 { theta, phi, lambda, .. } = &mut m.gates[k] {
                match rng.gen_range(0..3) {
                    0 => *theta += d,
                    1 => *phi += d,
                    _ => *lambda += d,
                }
            }
        }
        _ => {
            let q = rng.gen_range(0..n);
            let g = match rng.gen_range(0..3) {
                0 => Gate::u3(q, PI, 0.0, PI),
                1 if n >= 2 => Gate::Cz(q, (q + 1) % n),
                _ => Gate::u3(q, 0.0, 0.0, rng.gen_range(0.2..1.0)),
            };
            let at = rng.gen_range(0..=m.gates.len());
            m.gates.insert(at, g);
        }
    }
    m
}

/// Equivalent pair: ZX must certify it and match the oracle phase.
fn agree_equal(a: &Circuit, b: &Circuit) -> Result<(), String> {
    let z = equivalent(a, b, 0).map_err(|e| e.to_string())?;
    let o = oracle_equiv(a, b, 8).map_err(|e| e.to_string())?;
    ensure(o.equivalent, || "oracle rejects an equivalent pair".into())?;
    ensure(z.equivalent && z.method == Method::Zx, || format!("ZX did not certify: {:?}", z.witness))?;
    let d = (z.global_phase.unwrap() - o.global_phase.unwrap()).rem_euclid(2.0 * PI);
    ensure(d.min(2.0 * PI - d) <= PHASE_TOL, || format!("phase {:?} vs {:?}", z.global_phase, o.global_phase))
}

fn c5_checker(hw: &HardwareConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut agreed, mut killed, mut mutants) = (0, 0, 0);
    for case in 0..200 {
        let n = rng.gen_range(1..=8);
        let len = rng.gen_range(1..=40);
        let gates = (0..len).map(|_| random_gate(&mut rng, n)).collect();
        let source = Circuit::with_gates(format!("rand{case}"), n, gates);
        let tile = compile_circuit(&source, 0.4, 4, hw).map_err(|e| format!("case {case}: {e}"))?;
        let native = &tile.circuit;
        let rec = reconstruct(&tile.program, &(0..n).collect::<Vec<_>>(), hw).map_err(|e| e.to_string())?;
        ensure(rec.violations.is_empty(), || format!("case {case}: isolation"))?;
        ensure(oracle_equiv(&source, &rec.circuit, 8).map_err(|e| e.to_string())?.equivalent, || {
            format!("case {case}: compiled program differs from the source")
        })?;
        agree_equal(native, native).map_err(|e| format!("case {case} (self): {e}"))?;
        agree_equal(native, &rec.circuit).map_err(|e| format!("case {case} (compiled): {e}"))?;

        let mut mutant = mutate(&rec.circuit, &mut rng);
        while oracle_equiv(native, &mutant, 8).map_err(|e| e.to_string())?.equivalent {
            mutant = mutate(&rec.circuit, &mut rng);
        }
        mutants += 1;
        let z = equivalent(native, &mutant, 0).map_err(|e| e.to_string())?;
        ensure(!z.equivalent, || format!("case {case}: ZX accepted a mutant"))?;
        if !equivalent(native, &mutant, 12).map_err(|e| e.to_string())?.equivalent {
            killed += 1;
        }
        agreed += 1;
    }
    ensure(agreed == 200 && killed == mutants, || format!("agreement {agreed}/200, killed {killed}/{mutants}"))?;
    Ok(format!("agreement {agreed}/200, killed {killed}/{mutants}"))
}

fn u3(t: f64, p: f64, l: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    [[C64::new(c, 0.0), -C64::from_polar(s, l)], [C64::from_polar(s, p), C64::from_polar(c, p + l)]]
}

fn mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Max entry error after removing the best global phase.
fn phase_free_error(m: &[[C64; 2]; 2], t: &[[C64; 2]; 2]) -> f64 {
    let (i, j) = if t[0][0].norm() >= t[1][0].norm() { (0, 0) } else { (1, 0) };
    let ph = C64::from_polar(1.0, (m[i][j] / t[i][j]).arg());
    (0..4).map(|k| (m[k / 2][k % 2] - ph * t[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

fn c6_rows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let atoms: Vec<(usize, Site)> = vec![(0, (0.0, 0.0)), (1, (3.0, 0.0)), (2, (0.0, 10.0)), (3, (3.0, 10.0))];
    let ident = u3(0.0, 0.0, 0.0);
    let (mut worst, mut worst_spec) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let mut triple = || (rng.gen_range(0.0..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let (a, b) = (triple(), triple());
        let seq = lower_u3_rows(&[(0, atoms[0].1, a), (3, atoms[3].1, b)], &atoms);
        ensure(
            seq.len() <= 8 && seq.iter().filter(|(_, k)| matches!(k, TagKind::GlobalY { .. })).count() == 2,
            || "unexpected sequence shape".into(),
        )?;
        let mut acc = vec![ident; atoms.len()];
        for (instr, _) in &seq {
            let NAInstruction::U3Batch { sites, angles } = instr else { return Err("non-U3 instruction".into()) };
            for (k, &(_, p)) in atoms.iter().enumerate() {
                for (s, &(t, ph, l)) in sites.iter().zip(angles) {
                    if (s.0 - p.0).abs() < 1e-9 && (s.1 - p.1).abs() < 1e-9 {
                        acc[k] = mul(&u3(t, ph, l), &acc[k]);
                    }
                }
            }
        }
        worst =
            worst.max(phase_free_error(&acc[0], &u3(a.0, a.1, a.2))).max(phase_free_error(&acc[3], &u3(b.0, b.1, b.2)));
        worst_spec = worst_spec.max(phase_free_error(&acc[1], &ident)).max(phase_free_error(&acc[2], &ident));
    }
    ensure(worst <= ROW_TOL && worst_spec <= ROW_TOL, || {
        format!("target error {worst:.2e}, spectator error {worst_spec:.2e}")
    })?;
    Ok(format!("1000 triples: target error {worst:.1e}, spectator error {worst_spec:.1e}"))
}

fn c7_points(hw: &HardwareConfig) -> Outcome {
    ensure(hw.t2_us == 1.5e6 && hw.t_init_ms == 82.0, || "unexpected default device".into())?;
    let cz = fidelity(0, 1, 0, &[], hw);
    let pair = fidelity(0, 0, 2, &[], hw);
    let idle = fidelity(0, 0, 0, &[15_000.0], hw);
    ensure(cz == 0.995, || format!("lone CZ {cz}"))?;
    ensure((pair - 0.999 * 0.999).abs() <= POINT_TOL, || format!("transfer pair {pair}"))?;
    ensure((idle - (-0.01f64).exp()).abs() <= POINT_TOL, || format!("idle {idle}"))?;
    Ok(format!("CZ {cz}, transfer pair {pair:.6}, idle {idle:.12}"))
}

fn c8_planner(hw: &HardwareConfig, circuits: &[Circuit]) -> Outcome {
    let (s, r) = (hw.storage_spacing_um, hw.storage_rows);
    for c in circuits {
        let native = rebase_to_native(c);
        let nq = native.n_qubits;
        let widths: Vec<f64> = (0..=5)
            .map(|k| plan_layout(&native, k as f64 * 0.2, hw, 4).map(|l| l.w_selected))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(widths.windows(2).all(|w| w[1] >= w[0] - 1e-9), || format!("{}: not monotone {widths:?}", c.name))?;
        // smallest grid width at or above W_min that seats every qubit (plus one site when entangling)
        let mut w0 = (nq / r) as f64 * s;
        while r * ((w0 / s + 1e-9).floor() as usize + 1) < nq {
            w0 += s;
        }
        if native.gates.iter().any(|g| matches!(g, Gate::Cz(..))) {
            w0 = w0.max(hw.entanglement_site_spacing_um);
        }
        ensure((widths[0] - w0).abs() < 1e-9, || format!("{}: w(0) = {}, want {w0}", c.name, widths[0]))?;
        let best = plan_layout(&native, 1.0, hw, 4).map_err(|e| e.to_string())?.w_best;
        ensure(best >= (nq - 1) as f64 * s - 1e-9, || format!("{}: W_best {best} below the storage row", c.name))?;
        ensure((widths[5] - best).abs() < 1e-9, || format!("{}: w(1) = {}, W_best = {best}", c.name, widths[5]))?;
    }
    Ok(format!("{} circuits monotone with exact endpoints", circuits.len()))
}

fn c4_placement(hw: &HardwareConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = PlacerParams { grid_um: Some(hw.width_um / 7.0), ..PlacerParams::default() };
    let mut worst_gap: f64 = 0.0;
    for inst in 0..20 {
        let k = rng.gen_range(2..=3);
        let tiles: Vec<Tile> = (0..k)
            .map(|t| {
                let n = rng.gen_range(2..=5);
                let mut gates = Vec::new();
                for _ in 0..rng.gen_range(3..12) {
                    let a = rng.gen_range(0..n);
                    gates.push(Gate::H(a));
                    gates.push(Gate::Cz(a, (a + 1 + rng.gen_range(0..n - 1)) % n));
                }
                compile_circuit(&Circuit::with_gates(format!("p{inst}_{t}"), n, gates), rng.gen_range(0.0..=1.0), 4, hw)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let sa = place(&tiles, hw, &params);
        let opt = place_exhaustive(&tiles, hw, &params);
        ensure(sa.placed.iter().all(|&p| p), || format!("instance {inst}: SA left tiles unplaced"))?;
        // recount conflicts from the anchors
        let mut c = 0;
        for i in 0..k {
            for j in i + 1..k {
                c += conflict_cost(&tiles[i], &tiles[j], sa.anchors[i], sa.anchors[j], hw);
            }
        }
        ensure(c == sa.conflicts, || format!("instance {inst}: reported {} conflicts, recount {c}", sa.conflicts))?;
        let gap = (sa.cost - opt.cost) / opt.cost.abs().max(1e-9);
        worst_gap = worst_gap.max(gap);
        ensure(gap <= PLACE_GAP, || format!("instance {inst}: SA cost {} vs optimum {}", sa.cost, opt.cost))?;
    }
    Ok(format!("20 instances on 8 slots, worst gap {:.2}%", worst_gap * 100.0))
}

fn owner_of(p: &NAProgram, id: usize) -> &str {
    p.qubit_map.get(&id).map_or("", String::as_str)
}

fn c9_isolation(hw: &HardwareConfig, circuits: &[Circuit]) -> Outcome {
    let out = run(circuits, &RunConfig::default(), hw).map_err(|e| e.to_string())?;
    let (mut pulses, mut batches) = (0, 0);
    for (b, bin) in out.bins.iter().enumerate() {
        let p = &bin.schedule.program;
        let mut st = AtomState::default();
        for (i, instr) in p.instructions.iter().enumerate() {
            match instr {
                NAInstruction::Rydberg => {
                    pulses += 1;
                    for x in 0..st.pos.len() {
                        for y in x + 1..st.pos.len() {
                            let (a, c) = (st.pos[x], st.pos[y]);
                            let near = (a.0 - c.0).hypot(a.1 - c.1) <= hw.blockade_radius_um;
                            let zone = hw.in_entanglement_zone(a.1) && hw.in_entanglement_zone(c.1);
                            let foreign = owner_of(p, st.ids[x]) != owner_of(p, st.ids[y]);
                            ensure(!(near && zone && foreign), || {
                                format!(
                                    "bin {b} instruction {i}: atoms {} and {} share a blockade",
                                    st.ids[x], st.ids[y]
                                )
                            })?;
                        }
                    }
                }
                NAInstruction::Move { from, to } => {
                    batches += 1;
                    let moves: Vec<MoveOp> = from
                        .iter()
                        .zip(to)
                        .enumerate()
                        .map(|(k, (&f, &t))| MoveOp { owner: 0, qubit: k, from: f, to: t })
                        .collect();
                    batch_compatible(&moves, &st.pos, hw).map_err(|v| format!("bin {b} instruction {i}: {v:?}"))?;
                }
                _ => {}
            }
            st.apply(i, instr).map_err(|e| e.to_string())?;
        }
    }
    Ok(format!("{} bins, {pulses} Rydberg pulses, {batches} move batches clean", out.bins.len()))
}

fn c10_reproducible() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cli_run(&[], &a)?;
    cli_run(&[], &b)?;
    let mut files = Vec::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for e in std::fs::read_dir(a.join(&rel)).map_err(|e| e.to_string())? {
            let e = e.map_err(|e| e.to_string())?;
            let r = rel.join(e.file_name());
            if e.path().is_dir() {
                stack.push(r);
            } else {
                files.push(r);
            }
        }
    }
    ensure(files.iter().any(|f| f.extension().is_some_and(|x| x == "naqasm")), || "no .naqasm emitted".into())?;
    for f in &files {
        let (x, y) = (std::fs::read(a.join(f)), std::fs::read(b.join(f)));
        ensure(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), || format!("{} differs", f.display()))?;
    }
    Ok(format!("{} files byte-identical", files.len()))
}

fn main() {
    let hw = default_hardware();
    let circuits = corpus_circuits();
    let criteria: Vec<Criterion> = vec![
        ("C1 throughput band", Duration::from_secs(120), Box::new(c1_throughput)),
        ("C2 fidelity preservation", Duration::from_secs(120), Box::new(|| c2_fidelity(&hw, &circuits))),
        ("C3 bundler dominance", Duration::from_secs(300), Box::new(|| c3_bundler(&hw))),
        ("C4 placement optimality", Duration::from_secs(120), Box::new(|| c4_placement(&hw))),
        ("C5 checker soundness", Duration::from_secs(300), Box::new(|| c5_checker(&hw))),
        ("C6 row decomposition", Duration::from_secs(30), Box::new(c6_rows)),
        ("C7 fidelity point values", Duration::from_secs(1), Box::new(|| c7_points(&hw))),
        ("C8 planner monotonicity", Duration::from_secs(10), Box::new(|| c8_planner(&hw, &circuits))),
        ("C9 physical isolation", Duration::from_secs(60), Box::new(|| c9_isolation(&hw, &circuits))),
        ("C10 reproducibility", Duration::from_secs(60), Box::new(c10_reproducible)),
    ];
    let mut failed = 0;
    for (name, budget, f) in &criteria {
        let t = Instant::now();
        let mut result = f();
        let dt = t.elapsed();
        if result.is_ok() && dt > *budget {
            result = Err(format!("took {dt:.1?}, budget {budget:?}"));
        }
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{dt:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{dt:.2?}]");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
