use std::path::PathBuf;

use multiq_core::corpus::{generate, write_corpus};
use multiq_core::{compile_circuit, default_hardware, load_corpus, Method};

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn shipped_corpus_matches_the_generators() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path()).unwrap();
    assert_eq!(manifest.len(), generate().len());
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    for name in names {
        let fresh = std::fs::read(dir.path().join(&name)).unwrap();
        let kept = std::fs::read(shipped().join(&name)).unwrap_or_else(|_| panic!("{name} not shipped"));
        assert!(fresh == kept, "{name} is stale; regenerate with the gen_corpus example");
    }
}

#[test]
fn every_entry_loads_with_a_family() {
    let c = load_corpus(shipped()).unwrap();
    assert!(c.errors.is_empty(), "{:?}", c.errors);
    assert_eq!(c.entries.len(), generate().len());
    for e in &c.entries {
        assert!(e.family.is_some(), "{}", e.name);
        assert_eq!(e.circuit.as_ref().unwrap().n_qubits, e.n_qubits);
    }
}

#[test]
fn every_solo_tile_verifies_by_rewriting() {
    let hw = default_hardware();
    for e in load_corpus(shipped()).unwrap().entries {
        let tile = compile_circuit(e.circuit.as_ref().unwrap(), 0.4, 4, &hw).unwrap();
        let qubits: Vec<usize> = (0..tile.n_qubits).collect();
        let v = multiq_core::check(&tile.circuit, &tile.program, &qubits, &hw, 0).unwrap();
        assert!(v.equivalent && v.method == Method::Zx, "{}: {:?}", e.name, v.witness);
    }
}
