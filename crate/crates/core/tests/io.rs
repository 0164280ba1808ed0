use std::io::Write as _;

use hogwild::io::{
    parse_edgelist, parse_svmlight, parse_triplets, write_edgelist, write_svmlight, write_triplets,
};
use hogwild::io::{synth, DatasetSpec, SyntheticSpec, TestSet};
use hogwild::problems::{McProblem, SparseVec, SvmProblem};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
    ]
}

fn example() -> impl Strategy<Value = (SparseVec, f64)> {
    (
        proptest::collection::btree_set(0usize..500, 1..12),
        proptest::collection::vec(finite(), 12),
        any::<bool>(),
    )
        .prop_map(|(idx, vals, pos)| {
            let indices: Vec<usize> = idx.into_iter().collect();
            let values = vals[..indices.len()].to_vec();
            (
                SparseVec::new(indices, values).unwrap(),
                if pos { 1.0 } else { -1.0 },
            )
        })
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #[test]
    fn svmlight_round_trip(examples in proptest::collection::vec(example(), 1..30)) {
        let mut buf = Vec::new();
        write_svmlight(&mut buf, &examples).unwrap();
        let parsed = parse_svmlight(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed.examples.len(), examples.len());
        for ((a, ya), (b, yb)) in parsed.examples.iter().zip(&examples) {
            prop_assert_eq!(ya, yb);
            prop_assert_eq!(&a.indices, &b.indices);
            prop_assert_eq!(bits(&a.values), bits(&b.values));
        }
    }

    #[test]
    fn triplets_round_trip(
        cells in proptest::collection::btree_set((0usize..40, 0usize..30), 1..100),
        vals in proptest::collection::vec(finite(), 100),
    ) {
        let entries: Vec<_> = cells.into_iter().zip(vals).map(|((u, v), z)| (u, v, z)).collect();
        let mut buf = Vec::new();
        write_triplets(&mut buf, &entries).unwrap();
        let parsed = parse_triplets(buf.as_slice(), 40, 30).unwrap();
        prop_assert_eq!(parsed.len(), entries.len());
        for (a, b) in parsed.iter().zip(&entries) {
            prop_assert_eq!((a.0, a.1, a.2.to_bits()), (b.0, b.1, b.2.to_bits()));
        }
    }

    #[test]
    fn edgelist_round_trip(
        arcs in proptest::collection::vec((0usize..100, 1usize..100, 1e-9f64..1e9), 1..100),
    ) {
        let arcs: Vec<_> = arcs.into_iter().map(|(u, d, w)| (u, (u + d) % 100, w)).collect();
        let mut buf = Vec::new();
        write_edgelist(&mut buf, &arcs).unwrap();
        let parsed = parse_edgelist(buf.as_slice()).unwrap();
        prop_assert_eq!(&parsed.arcs, &arcs);
        let nodes = arcs.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap();
        prop_assert_eq!(parsed.nodes, nodes);
    }

    #[test]
    fn feature_degrees_match_brute_force(examples in proptest::collection::vec(example(), 1..30)) {
        let mut buf = Vec::new();
        write_svmlight(&mut buf, &examples).unwrap();
        let parsed = parse_svmlight(buf.as_slice()).unwrap();
        let counts = parsed.feature_counts();
        for (u, &d) in counts.iter().enumerate() {
            let brute = examples.iter().filter(|(z, _)| z.indices.contains(&u)).count();
            prop_assert_eq!(d as usize, brute);
        }
        let p = SvmProblem::new(parsed.num_features, parsed.examples, 0.1).unwrap();
        prop_assert_eq!(p.degrees(), counts.as_slice());
    }
}

#[test]
fn svmlight_examples() {
    let d = parse_svmlight("+1 3:0.5 7:1.2\n".as_bytes()).unwrap();
    assert_eq!(d.examples.len(), 1);
    assert_eq!(d.examples[0].0.indices, vec![2, 6]);
    assert_eq!(d.examples[0].1, 1.0);

    let d = parse_svmlight("# header\r\n+1 3:1\r\n\r\n-1\t1:2  3:4\r\n".as_bytes()).unwrap();
    assert_eq!(d.feature_counts(), vec![1, 0, 2]);

    let err = parse_svmlight("+2 1:1.0\n".as_bytes()).unwrap_err();
    assert_eq!(err.to_string(), "label must be ±1 (line 1)");
    for bad in ["+1 1:1 1:2", "+1 3:1 2:1", "+1 0:1", "+1 3-1", "+1 1:x"] {
        let text = format!("-1 1:1\n{bad}\n");
        let err = parse_svmlight(text.as_bytes()).unwrap_err().to_string();
        assert!(err.ends_with("(line 2)"), "{bad}: {err}");
    }
}

#[test]
fn triplet_examples() {
    let e = parse_triplets("0 1 5.0\n".as_bytes(), 2, 2).unwrap();
    assert_eq!(e, vec![(0, 1, 5.0)]);
    assert!(parse_triplets("0 1 5.0\n0 1 2.0\n".as_bytes(), 2, 2).is_err());
    assert!(parse_triplets("2 0 1.0\n".as_bytes(), 2, 2).is_err());
    let p = McProblem::new(
        2,
        2,
        1,
        0.1,
        parse_triplets("0 0 1\n0 1 2\n".as_bytes(), 2, 2).unwrap(),
    )
    .unwrap();
    assert_eq!(p.row_counts(), &[2, 0]);
}

#[test]
fn edgelist_examples() {
    let l = parse_edgelist("0 1 2.0\n".as_bytes()).unwrap();
    assert_eq!((l.arcs.len(), l.nodes), (1, 2));
    let spec_err = |text: &str| parse_edgelist(text.as_bytes()).unwrap_err().to_string();
    assert!(spec_err("0 0 1.0").contains("self-loop"));
    assert!(spec_err("0 1 -1").contains("nonnegative weight required"));
    assert!(spec_err("0 1 0").contains("nonnegative weight required"));
}

#[test]
fn loading_files_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(b"0 1 2.0\n")
        .unwrap();
    let ds = DatasetSpec::Edgelist {
        path,
        d: 2,
        nodes: None,
    }
    .load()
    .unwrap();
    assert_eq!((ds.problem.dim(), ds.problem.num_terms()), (4, 1));

    let missing = DatasetSpec::Svmlight {
        path: dir.path().join("absent"),
        lambda: 0.1,
        test_path: None,
    };
    let err = missing.load().unwrap_err();
    assert!(err.is_data_error() && err.to_string().starts_with("cannot open"));
}

fn svm_bytes(seed: u64) -> Vec<u8> {
    let s = synth::svm(300, 80, 7, 0.1, seed).unwrap();
    let mut buf = Vec::new();
    write_svmlight(&mut buf, &s.examples).unwrap();
    buf
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(svm_bytes(3), svm_bytes(3));
    assert_ne!(svm_bytes(3), svm_bytes(4));

    let mc = |seed| {
        let s = synth::matrix_completion(20, 25, 3, 0.3, 0.01, seed).unwrap();
        let mut buf = Vec::new();
        write_triplets(&mut buf, &s.observed).unwrap();
        buf
    };
    assert_eq!(mc(5), mc(5));

    let cut = |seed| {
        let (_, arcs) = synth::geometric_cut(200, 0.2, 9, seed).unwrap();
        let mut buf = Vec::new();
        write_edgelist(&mut buf, &arcs).unwrap();
        buf
    };
    assert_eq!(cut(6), cut(6));
}

#[test]
fn generator_examples() {
    let s = synth::matrix_completion(50, 50, 3, 0.3, 0.0, 1).unwrap();
    assert_eq!(s.observed.len(), 750);
    assert_eq!(s.observed.len() + s.held_out.len(), 2500);
    for &(u, v, z) in s.observed.iter().chain(&s.held_out) {
        assert_eq!(z, s.planted(u, v));
    }

    let s = synth::svm(1000, 200, 10, 0.0, 2).unwrap();
    assert!(s.examples.iter().all(|(z, _)| z.len() == 10));
    assert!(synth::svm(10, 5, 6, 0.0, 2).is_err());

    let (n, arcs) = synth::grid_cut(10, 10, 3).unwrap();
    assert_eq!((n, arcs.len()), (1000, 2700));
}

#[test]
fn synthetic_specs_round_trip_through_json() {
    let spec = DatasetSpec::Synthetic(SyntheticSpec::Svm {
        examples: 100,
        features: 30,
        nnz: 4,
        lambda: 0.01,
        noise: 0.0,
        test_examples: 20,
        seed: 1,
    });
    let text = serde_json::to_string(&spec).unwrap();
    let back: DatasetSpec = serde_json::from_str(&text).unwrap();
    let (a, b) = (spec.load().unwrap(), back.load().unwrap());
    assert_eq!(a.problem.num_terms(), 100);
    assert_eq!(a.problem.dim(), b.problem.dim());
    assert!(matches!(a.test, TestSet::Svm(ref t) if t.num_examples() == 20));
}
