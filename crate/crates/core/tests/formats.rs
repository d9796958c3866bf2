use std::io::Write;

use tgdist::distances::{lambda_vector, pairwise_distances, DistanceKind};
use tgdist::eval::experiments::{experiment_relabel, ActivitySource, RelabelConfig};
use tgdist::io::{
    load_contact_list, read_embedding_csv, read_graph, write_distance_matrix_csv, write_embedding_csv, write_graph,
    write_lambda_csv,
};
use tgdist::synth::{BurstinessProfile, Model};
use tgdist::{EDRepConfig, Embedding};

#[test]
fn contact_list_file_to_graph_dump_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("contacts.dat");
    let mut f = std::fs::File::create(&raw).unwrap();
    writeln!(f, "# t i j").unwrap();
    writeln!(f, "1000 17 4").unwrap();
    writeln!(f, "1020 4 17").unwrap();
    writeln!(f, "1040 4 9").unwrap();
    writeln!(f, "1600 9 17 extra columns").unwrap();
    writeln!(f, "1200 17 17").unwrap();
    writeln!(f, "2840 9 4").unwrap();
    drop(f);

    let g = load_contact_list(&raw, 600).unwrap();
    assert_eq!(g.n(), 3);
    assert_eq!(g.num_snapshots(), 4);
    assert_eq!(g.node_names().unwrap(), &["4", "9", "17"]);
    // 4 -> 0, 9 -> 1, 17 -> 2
    assert_eq!(g.snapshot(0).weight(0, 2), 2.0);
    assert_eq!(g.snapshot(0).weight(0, 1), 1.0);
    assert_eq!(g.snapshot(1).weight(1, 2), 1.0);
    assert!(g.snapshot(2).is_empty());
    assert_eq!(g.snapshot(3).weight(0, 1), 1.0);

    let json = write_graph(&g, dir.path().join("graph")).unwrap();
    assert!(json.with_extension("edges").exists());
    assert_eq!(read_graph(&json).unwrap(), g);
}

#[test]
fn embedding_csv_round_trip_is_exact() {
    let x = Embedding::random(25, 4, 1);
    let mut buf = Vec::new();
    write_embedding_csv(&x, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("node,x0,x1,x2,x3\n"));
    assert_eq!(read_embedding_csv(buf.as_slice()).unwrap(), x);
}

#[test]
fn distance_and_lambda_tables() {
    let xs: Vec<Embedding> = (0..3).map(|s| Embedding::random(10, 2, s)).collect();
    let ids = vec!["a".to_string(), "b".into(), "c".into()];
    let dm = pairwise_distances(&xs, Some(ids.clone()), DistanceKind::Unmatched).unwrap();
    let mut buf = Vec::new();
    write_distance_matrix_csv(&dm, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ",a,b,c");
    assert!(lines[1].starts_with("a,0,"));
    assert_eq!(lines.len(), 4);

    let lambdas: Vec<_> = xs.iter().map(lambda_vector).collect();
    let mut buf = Vec::new();
    write_lambda_csv(ids.iter().map(String::as_str).zip(&lambdas), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("graph_id,lambda1,lambda2\n"));
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, lambdas[0].values());
}

#[test]
fn experiment_bundle_files() {
    let cfg = RelabelConfig {
        n: 20,
        alphas: vec![0.0, 1.0],
        repetitions: 2,
        models: vec![Model::Sbm],
        activity: ActivitySource::Synthetic {
            t_count: 10,
            profile: BurstinessProfile { series: 20, ..Default::default() },
        },
        embedding: EDRepConfig { d: 3, epochs: 3, ..Default::default() },
        ..Default::default()
    };
    let report = experiment_relabel(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = report.write_bundle(dir.path().join("relabel")).unwrap();
    assert_eq!(written.len(), 2);
    let summary = std::fs::read_to_string(&written[1]).unwrap();
    assert!(summary.starts_with("group,x,mean,std,count\n"));
    let back: tgdist::eval::experiments::ExperimentReport =
        serde_json::from_str(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
    assert_eq!(back, report);
}
