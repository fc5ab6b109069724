use qre_defense::experiments::{
    metadata_path, run_sweep, write_table_file, BuiltinSpace, Grid, OutputFormat, SpaceRef, SweepConfig, SweepKind,
    SweepSpec,
};
use qre_defense::{defender_response, GameError, SecurityGame};

#[test]
fn sweeps_are_byte_identical_across_runs() {
    for kind in [SweepKind::LambdaSweep, SweepKind::LossSweep, SweepKind::PoqaSweep] {
        let spec = SweepSpec::default_for(kind);
        let a = run_sweep(&spec).unwrap().table.to_string(OutputFormat::Csv).unwrap();
        let b = run_sweep(&spec).unwrap().table.to_string(OutputFormat::Csv).unwrap();
        assert_eq!(a, b, "{kind:?}");
        let a = run_sweep(&spec).unwrap().table.to_string(OutputFormat::Jsonl).unwrap();
        let b = run_sweep(&spec).unwrap().table.to_string(OutputFormat::Jsonl).unwrap();
        assert_eq!(a, b, "{kind:?}");
    }
}

#[test]
fn lambda_sweep_agrees_with_direct_evaluation() {
    let spec = SweepSpec::default_for(SweepKind::LambdaSweep);
    let res = run_sweep(&spec).unwrap();
    let game = SecurityGame::exponential(10.0, 1.0).unwrap();
    let space = BuiltinSpace::C.build(1.0).unwrap();
    let lambdas = res.table.float_column("lambda").unwrap();
    let s4 = res.table.float_column("sigma_r4").unwrap();
    for (l, s) in lambdas.iter().zip(&s4) {
        assert_eq!(*s, defender_response(&game, &space, *l).unwrap().get(3));
    }
}

#[test]
fn written_files_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("poqa.csv");
    let res = run_sweep(&SweepSpec::default_for(SweepKind::PoqaSweep)).unwrap();
    write_table_file(&res.table, &path, OutputFormat::Csv, Some(&res.metadata)).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("lambda,A,poqa,ln_poqa,bound\n"));
    assert_eq!(csv.lines().count(), 181);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(metadata_path(&path)).unwrap()).unwrap();
    assert_eq!(meta["kind"], "poqa_sweep");
    assert_eq!(meta["R"], 10.0);
    assert_eq!(meta["space"]["name"], "C");
    assert_eq!(meta["space"]["site1"], serde_json::json!([10.0, 5.35, 5.0, 4.8, 0.0]));
    assert!(meta["generated_at"].is_string());
}

#[test]
fn jsonl_lines_parse() {
    let mut spec = SweepSpec::default_for(SweepKind::LossSweep);
    spec.lambda = Grid::Values(vec![1.0, 10.0]);
    let text = run_sweep(&spec).unwrap().table.to_string(OutputFormat::Jsonl).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0]["A"], 0.5);
    assert_eq!(rows[0]["case_condition_ok"], true);
}

#[test]
fn explicit_space_from_config() {
    let cfg = SweepConfig::from_json(r#"{"space": [0, 2.5, 5], "R": 5, "A": [0.5, 2.0], "lambda": [0, 1, 100]}"#)
        .unwrap();
    let spec = cfg.resolve(SweepKind::PoqaSweep).unwrap();
    assert_eq!(spec.space, SpaceRef::Explicit(vec![0.0, 2.5, 5.0]));
    let res = run_sweep(&spec).unwrap();
    assert_eq!(res.table.rows.len(), 6);
    assert_eq!(res.metadata.space.name, None);

    let bad = SweepConfig::from_json(r#"{"space": [0, 2.5, 6], "R": 5}"#).unwrap();
    match bad.resolve(SweepKind::PoqaSweep) {
        Err(GameError::Config { path, .. }) => assert_eq!(path, "space"),
        other => panic!("unexpected {other:?}"),
    }
}
