use surfspin::crystal::{build_step_model, StepModelSpec};
use surfspin::hyperfine::{scan_structure, AisoFixture};

// Needs more than ten nuclei at or above 10 MHz on the terminated step model
// with the bundled Fermi-contact fixture.
#[test]
fn more_than_ten_nuclei_above_ten_mhz() {
    let model = build_step_model(&StepModelSpec::default()).unwrap();
    let s = &model.structure;
    let fx = AisoFixture::paper();
    let rows = scan_structure(s, &fx.spin_center(s).unwrap(), fx.field(), &fx.table(s).unwrap(), 10.0).unwrap();
    let flagged: Vec<_> = rows.iter().filter(|r| r.flagged).collect();
    assert!(flagged.len() > 10, "{} flagged: {flagged:?}", flagged.len());
}
