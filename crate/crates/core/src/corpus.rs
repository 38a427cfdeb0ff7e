//! Desk-scale benchmark corpus: generators for the standard families and a
//! loader for directories of `.qasm` files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::frontend::{emit_qasm, parse_openqasm, Circuit, FrontendError, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Bv,
    Ghz,
    Dj,
    Qaoa,
    HamSim,
    GraphState,
    Cat,
    Knn,
    Swp,
    Wst,
    Multiply,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Bv,
        Family::Ghz,
        Family::Dj,
        Family::Qaoa,
        Family::HamSim,
        Family::GraphState,
        Family::Cat,
        Family::Knn,
        Family::Swp,
        Family::Wst,
        Family::Multiply,
    ];

    /// File-name prefix.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Bv => "bv",
            Family::Ghz => "ghz",
            Family::Dj => "dj",
            Family::Qaoa => "qaoa",
            Family::HamSim => "hamsim",
            Family::GraphState => "graphstate",
            Family::Cat => "cat",
            Family::Knn => "knn",
            Family::Swp => "swp",
            Family::Wst => "wst",
            Family::Multiply => "multiply",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL.into_iter().find(|f| f.tag() == s).ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub name: String,
    pub n_qubits: usize,
    pub path: PathBuf,
    /// From the `<family>_n<qubits>.qasm` naming convention.
    pub family: Option<Family>,
    #[serde(skip)]
    pub circuit: Option<Circuit>,
}

#[derive(Debug)]
pub struct CorpusError {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub entries: Vec<BenchmarkEntry>,
    pub errors: Vec<CorpusError>,
}

impl Corpus {
    pub fn get(&self, name: &str) -> Option<&BenchmarkEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn family_of(stem: &str) -> Option<Family> {
    let (prefix, size) = stem.rsplit_once("_n")?;
    size.parse::<usize>().ok()?;
    prefix.parse().ok()
}

/// Loads every `.qasm` file under `dir` (non-recursive, sorted by name).
/// Unreadable or unparsable files are reported in `errors` and skipped.
pub fn load_corpus(dir: impl AsRef<Path>) -> std::io::Result<Corpus> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    paths.sort();
    let mut corpus = Corpus::default();
    for path in paths {
        let parsed = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| parse_openqasm(&t).map_err(|e: FrontendError| e.to_string()));
        match parsed {
            Ok(mut circuit) => {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                circuit.name = name.clone();
                corpus.entries.push(BenchmarkEntry {
                    family: family_of(&name),
                    n_qubits: circuit.n_qubits,
                    name,
                    path,
                    circuit: Some(circuit),
                });
            }
            Err(error) => {
                log::warn!("skipping {}: {error}", path.display());
                corpus.errors.push(CorpusError { path, error });
            }
        }
    }
    Ok(corpus)
}

fn ccx(c: &mut Circuit, a: usize, b: usize, t: usize) {
    use Gate::*;
    for g in [
        H(t),
        Cx(b, t),
        Tdg(t),
        Cx(a, t),
        T(t),
        Cx(b, t),
        Tdg(t),
        Cx(a, t),
        T(b),
        T(t),
        H(t),
        Cx(a, b),
        T(a),
        Tdg(b),
        Cx(a, b),
    ] {
        c.push(g);
    }
}

fn cswap(c: &mut Circuit, ctrl: usize, a: usize, b: usize) {
    c.push(Gate::Cx(b, a));
    ccx(c, ctrl, a, b);
    c.push(Gate::Cx(b, a));
}

fn cry(c: &mut Circuit, ctrl: usize, t: usize, theta: f64) {
    c.push(Gate::Ry(t, theta / 2.0));
    c.push(Gate::Cx(ctrl, t));
    c.push(Gate::Ry(t, -theta / 2.0));
    c.push(Gate::Cx(ctrl, t));
}

/// Bernstein-Vazirani on `n - 1` data qubits with secret 1011...
pub fn bv(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("bv_n{n}"), n);
    let anc = n - 1;
    c.push(Gate::X(anc));
    for q in 0..n {
        c.push(Gate::H(q));
    }
    for q in (0..anc).filter(|q| q % 4 != 1) {
        c.push(Gate::Cx(q, anc));
    }
    for q in 0..anc {
        c.push(Gate::H(q));
    }
    c
}

pub fn ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("ghz_n{n}"), n);
    c.push(Gate::H(0));
    for q in 0..n - 1 {
        c.push(Gate::Cx(q, q + 1));
    }
    c
}

/// Cat state fanned out from qubit 0.
pub fn cat(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("cat_n{n}"), n);
    c.push(Gate::H(0));
    for q in 1..n {
        c.push(Gate::Cx(0, q));
    }
    c
}

/// Deutsch-Jozsa with a balanced parity oracle.
pub fn dj(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("dj_n{n}"), n);
    let anc = n - 1;
    c.push(Gate::X(anc));
    for q in 0..n {
        c.push(Gate::H(q));
    }
    for q in 0..anc {
        if q % 2 == 0 {
            c.push(Gate::X(q));
        }
        c.push(Gate::Cx(q, anc));
        if q % 2 == 0 {
            c.push(Gate::X(q));
        }
    }
    for q in 0..anc {
        c.push(Gate::H(q));
    }
    c
}

/// One QAOA round of MaxCut on a ring.
pub fn qaoa(n: usize) -> Circuit {
    let (gamma, beta) = (0.7, 0.35);
    let mut c = Circuit::new(format!("qaoa_n{n}"), n);
    for q in 0..n {
        c.push(Gate::H(q));
    }
    for q in 0..n {
        let r = (q + 1) % n;
        c.push(Gate::Cx(q, r));
        c.push(Gate::Rz(r, 2.0 * gamma));
        c.push(Gate::Cx(q, r));
    }
    for q in 0..n {
        c.push(Gate::Rx(q, 2.0 * beta));
    }
    c
}

/// Two Trotter steps of a transverse-field Ising chain.
pub fn hamsim(n: usize) -> Circuit {
    let (j, h, dt) = (1.0, 0.5, 0.2);
    let mut c = Circuit::new(format!("hamsim_n{n}"), n);
    for _ in 0..2 {
        for q in 0..n - 1 {
            c.push(Gate::Cx(q, q + 1));
            c.push(Gate::Rz(q + 1, 2.0 * j * dt));
            c.push(Gate::Cx(q, q + 1));
        }
        for q in 0..n {
            c.push(Gate::Rx(q, 2.0 * h * dt));
        }
    }
    c
}

/// Ring graph state.
pub fn graph_state(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("graphstate_n{n}"), n);
    for q in 0..n {
        c.push(Gate::H(q));
    }
    for q in 0..n {
        c.push(Gate::Cz(q, (q + 1) % n));
    }
    c
}

/// Swap-test distance estimate between two rotated product states.
/// `n = 2k + 1`; qubit 0 is the ancilla.
pub fn knn(n: usize) -> Circuit {
    let k = (n - 1) / 2;
    let mut c = Circuit::new(format!("knn_n{n}"), n);
    for i in 0..k {
        c.push(Gate::Ry(1 + i, 0.3 + 0.2 * i as f64));
        c.push(Gate::Ry(1 + k + i, 0.9 - 0.15 * i as f64));
    }
    c.push(Gate::H(0));
    for i in 0..k {
        cswap(&mut c, 0, 1 + i, 1 + k + i);
    }
    c.push(Gate::H(0));
    c
}

/// Swap test on basis and superposition inputs; `n = 2k + 1`.
pub fn swp(n: usize) -> Circuit {
    let k = (n - 1) / 2;
    let mut c = Circuit::new(format!("swp_n{n}"), n);
    for i in 0..k {
        c.push(Gate::X(1 + i));
        if i % 2 == 0 {
            c.push(Gate::H(1 + k + i));
        }
    }
    c.push(Gate::H(0));
    for i in 0..k {
        cswap(&mut c, 0, 1 + i, 1 + k + i);
    }
    c.push(Gate::H(0));
    c
}

/// W state by a cascade of controlled rotations.
pub fn wst(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("wst_n{n}"), n);
    c.push(Gate::X(0));
    for q in 0..n - 1 {
        let theta = 2.0 * (1.0 / ((n - q) as f64).sqrt()).acos();
        cry(&mut c, q, q + 1, theta);
        c.push(Gate::Cx(q + 1, q));
    }
    c
}

/// Two-bit by two-bit multiplier: a = q0 q1, b = q2 q3, product q4..q7
/// (little endian), with inputs a = 3 and b = 2.
pub fn multiply() -> Circuit {
    let mut c = Circuit::new("multiply_n8", 8);
    let (a0, a1, b0, b1, p0, p1, p2, p3) = (0, 1, 2, 3, 4, 5, 6, 7);
    c.push(Gate::X(a0));
    c.push(Gate::X(a1));
    c.push(Gate::X(b1));
    ccx(&mut c, a0, b0, p0);
    ccx(&mut c, a1, b0, p1);
    ccx(&mut c, a0, b1, p1);
    ccx(&mut c, a1, b1, p2);
    ccx(&mut c, p0, p2, p3);
    c.push(Gate::Cx(p3, p2));
    c
}

/// The shipped corpus, in manifest order.
pub fn generate() -> Vec<(Family, Circuit)> {
    vec![
        (Family::Bv, bv(4)),
        (Family::Bv, bv(5)),
        (Family::Bv, bv(8)),
        (Family::Ghz, ghz(4)),
        (Family::Ghz, ghz(6)),
        (Family::Dj, dj(4)),
        (Family::Dj, dj(5)),
        (Family::Qaoa, qaoa(4)),
        (Family::Qaoa, qaoa(6)),
        (Family::HamSim, hamsim(5)),
        (Family::GraphState, graph_state(4)),
        (Family::GraphState, graph_state(6)),
        (Family::GraphState, graph_state(12)),
        (Family::Cat, cat(4)),
        (Family::Cat, cat(5)),
        (Family::Cat, cat(8)),
        (Family::Knn, knn(5)),
        (Family::Swp, swp(5)),
        (Family::Wst, wst(5)),
        (Family::Multiply, multiply()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub family: Family,
    pub n_qubits: usize,
    pub file: String,
}

/// Writes the generated corpus and `manifest.json` into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>) -> std::io::Result<Vec<ManifestEntry>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for (family, circuit) in generate() {
        let file = format!("{}.qasm", circuit.name);
        std::fs::write(dir.join(&file), emit_qasm(&circuit))?;
        manifest.push(ManifestEntry { name: circuit.name.clone(), family, n_qubits: circuit.n_qubits, file });
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::oracle::unitary;
    use num_complex::Complex64 as C64;

    fn basis_image(c: &Circuit, input: usize) -> Vec<(usize, C64)> {
        let dim = 1 << c.n_qubits;
        let u = unitary(c);
        (0..dim).map(|r| (r, u[r * dim + input])).filter(|(_, z)| z.norm() > 1e-9).collect()
    }

    #[test]
    fn every_family_is_generated() {
        let fams: std::collections::BTreeSet<Family> = generate().into_iter().map(|(f, _)| f).collect();
        assert_eq!(fams.len(), 11);
        for (_, c) in generate() {
            assert!((4..=12).contains(&c.n_qubits), "{}", c.name);
            c.validate().unwrap();
        }
    }

    #[test]
    fn multiplier_multiplies() {
        // 3 * 2 = 6 -> p1 and p2 set
        let c = multiply();
        let out = basis_image(&c, 0);
        assert_eq!(out.len(), 1);
        let r = out[0].0;
        let product = (r >> 4) & 0xf;
        assert_eq!(product, 6);
        assert_eq!(r & 0xf, 0b1011);
    }

    #[test]
    fn toffoli_decomposition_is_exact() {
        let mut c = Circuit::new("ccx", 3);
        ccx(&mut c, 0, 1, 2);
        for input in 0..8 {
            let out = basis_image(&c, input);
            assert_eq!(out.len(), 1);
            let expect = if input & 3 == 3 { input ^ 4 } else { input };
            assert_eq!(out[0].0, expect);
            assert!((out[0].1 - C64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn ghz_amplitudes() {
        let c = ghz(4);
        let out = basis_image(&c, 0);
        assert_eq!(out.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 15]);
    }

    #[test]
    fn w_state_has_single_excitations() {
        let c = wst(4);
        let out = basis_image(&c, 0);
        let idx: Vec<usize> = out.iter().map(|x| x.0).collect();
        assert_eq!(idx, vec![1, 2, 4, 8]);
        for (_, z) in out {
            assert!((z.norm_sqr() - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn bv_recovers_secret() {
        let c = bv(6);
        let out = basis_image(&c, 0);
        // data qubits 0..5 hold 1011 1 pattern (q % 4 != 1), ancilla in |->
        let secret: usize = (0..5).filter(|q| q % 4 != 1).map(|q| 1 << q).sum();
        assert!(out.iter().all(|(r, _)| r & 0x1f == secret));
    }

    #[test]
    fn family_from_name() {
        assert_eq!(family_of("graphstate_n12"), Some(Family::GraphState));
        assert_eq!(family_of("mystery_n3"), None);
        assert_eq!(family_of("ghz"), None);
    }

    #[test]
    fn load_skips_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_corpus(dir.path()).unwrap().entries.is_empty());
        std::fs::write(dir.path().join("ghz_n3.qasm"), emit_qasm(&ghz(3))).unwrap();
        std::fs::write(dir.path().join("bad_n2.qasm"), "OPENQASM 2.0;\nqreg q[2];\nccx q[0],q[1],q[0];\n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.entries.len(), 1);
        assert_eq!(c.entries[0].family, Some(Family::Ghz));
        assert_eq!(c.errors.len(), 1);
    }
}
