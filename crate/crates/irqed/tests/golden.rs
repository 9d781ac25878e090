//! Golden-file snapshots of the small-model enumeration and assembly.
//!
//! The basis order and the matrix elements of the fiber Hamiltonian are the
//! contract every downstream measurement builds on; a silent re-ordering or
//! sign change would shift observables in ways unit tests on invariants can
//! miss. These tests pin a two-mode model byte-for-byte. To regenerate
//! after an intentional change, run once with `IRQED_REGEN_GOLDEN=1` and
//! commit the refreshed snapshots together with the change that caused them.

use irqed::fockspace::grid::{build_mode_grid, RadialLayout};
use irqed::fockspace::{basis_dump, operator_dump, FockBasis};
use irqed::hamiltonian::FiberHamiltonian;
use irqed::kernels::Cutoff;
use std::path::PathBuf;
use std::sync::Arc;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_or_regen(name: &str, rendered: &str) {
    let path = golden_path(name);
    if std::env::var_os("IRQED_REGEN_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, rendered).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing snapshot {}; regenerate with IRQED_REGEN_GOLDEN=1", path.display()));
    assert_eq!(
        rendered,
        expected,
        "snapshot {name} drifted; if the change is intentional, regenerate with IRQED_REGEN_GOLDEN=1"
    );
}

#[test]
fn two_mode_model_matches_the_checked_in_snapshots() {
    let grid = build_mode_grid(0.1, 0.1, 1, 1, RadialLayout::LogUniform)
        .expect("two-mode grid must build");
    let basis = Arc::new(FockBasis::new(grid, 2, 2, 100_000).expect("basis must enumerate"));
    let h = FiberHamiltonian::assemble(
        [0.0, 0.0, 0.1],
        Cutoff::new(0.1).unwrap(),
        1e-2,
        Arc::clone(&basis),
    )
    .expect("assembly must succeed");

    let mut basis_json = serde_json::to_string_pretty(&basis_dump(&basis)).unwrap();
    basis_json.push('\n');
    check_or_regen("two_mode_basis.json", &basis_json);

    let mut operator_json = serde_json::to_string_pretty(&operator_dump(h.operator())).unwrap();
    operator_json.push('\n');
    check_or_regen("two_mode_hamiltonian.json", &operator_json);
}
