//! BIF, UAI and CSV behaviour on the fixture corpus.

mod common;

use bnkit::catalog;
use bnkit::fit::mle_fit;
use bnkit::io::{parse_bif, parse_bif_with_warnings, parse_uai, read_csv, serialize_bif, serialize_uai, write_csv};
use bnkit::{DiscreteBayesianNetwork, Error};
use common::*;

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

fn all_networks() -> Vec<(String, DiscreteBayesianNetwork)> {
    let mut out: Vec<_> = catalog::names()
        .map(|n| (n.to_string(), catalog::network(n).unwrap()))
        .collect();
    for name in ["chain", "chain3", "collider", "confounder", "iv", "latent", "mgraph"] {
        out.push((
            name.to_string(),
            parse_bif(&fixture_text(&format!("{name}.bif"))).unwrap(),
        ));
    }
    out
}

fn assert_same(a: &DiscreteBayesianNetwork, b: &DiscreteBayesianNetwork, tol: f64) {
    assert_eq!(a.dag(), b.dag());
    assert!(a.metas().eq(b.metas()));
    for v in a.variables() {
        let d = a
            .cpd(v)
            .unwrap()
            .factor()
            .max_abs_diff(b.cpd(v).unwrap().factor())
            .unwrap();
        assert!(d <= tol, "{v}: {d}");
    }
}

#[test]
fn corpus_has_at_least_ten_networks() {
    assert!(all_networks().len() >= 10);
}

#[test]
fn bif_round_trip_on_corpus() {
    for (name, bn) in all_networks() {
        let text = serialize_bif(&bn);
        assert_eq!(text, serialize_bif(&bn), "{name}: serialization is deterministic");
        assert!(!text.contains('\r'));
        let back = parse_bif(&text).unwrap();
        assert_same(&bn, &back, 1e-6);
        assert_eq!(serialize_bif(&back), text, "{name}");
    }
}

#[test]
fn uai_and_cross_format_round_trip_on_corpus() {
    for (name, bn) in all_networks() {
        let text = serialize_uai(&bn);
        let back = parse_uai(&text).unwrap();
        assert_same(&bn, &back, 1e-6);
        assert_eq!(serialize_uai(&back), text, "{name}");
        let cross = parse_bif(&serialize_bif(&back)).unwrap();
        assert_same(&bn, &cross, 1e-6);
    }
}

#[test]
fn golden_files_are_byte_identical() {
    let bn = catalog::network("student").unwrap();
    assert_eq!(serialize_bif(&bn), golden("student.bif"));
    assert_eq!(serialize_uai(&bn), golden("student.uai"));
}

#[test]
fn crlf_input_is_accepted() {
    for (_, bn) in all_networks().into_iter().take(3) {
        let bif = serialize_bif(&bn).replace('\n', "\r\n");
        assert_same(&bn, &parse_bif(&bif).unwrap(), 0.0);
        let uai = serialize_uai(&bn).replace('\n', "\r\n");
        assert_same(&bn, &parse_uai(&uai).unwrap(), 0.0);
    }
}

#[test]
fn minimal_two_variable_file() {
    // the chain fixture, read off by hand
    let bn = parse_bif(&fixture_text("chain.bif")).unwrap();
    assert_eq!(bn.cpd("A").unwrap().factor().values(), &[0.6, 0.4]);
    assert_eq!(bn.cpd("B").unwrap().factor().values(), &[0.7, 0.3, 0.2, 0.8]);
}

#[test]
fn table_for_parentless_variable() {
    let bn = parse_bif("variable A { type discrete [ 2 ] { x, y }; }\nprobability ( A ) { table 0.5 0.5; }\n").unwrap();
    assert_eq!(bn.cpd("A").unwrap().factor().values(), &[0.5, 0.5]);
}

#[test]
fn rejections_carry_positions() {
    let e = parse_bif(&fixture_text("malformed.bif")).unwrap_err();
    assert_eq!(e.kind(), "ParseError");
    assert_eq!(e.position().map(|p| p.0), Some(4));
    let e = parse_uai(&fixture_text("markov.uai")).unwrap_err();
    assert_eq!(e, Error::NotBayes { line: 1 });
    let e =
        parse_bif("variable A { type discrete [ 2 ] { x, y }; }\nprobability ( A ) { table 0.5, 0.6; }\n").unwrap_err();
    assert_eq!(e.kind(), "SemanticError");
    assert_eq!(e.position(), Some((2, 1)));
}

#[test]
fn properties_are_kept() {
    let text = "network n {\n  property \"author someone\";\n}\nvariable A {\n  type discrete [ 2 ] { x, y };\n  property \"position = (1, 2)\";\n}\nprobability ( A ) {\n  table 0.25, 0.75;\n}\n";
    let (bn, warnings) = parse_bif_with_warnings(text).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(serialize_bif(&bn), text);
}

#[test]
fn csv_weights_match_duplicated_rows() {
    let weighted = read_csv("A,B,__weight__\nx,u,2\nx,v,1\ny,v,1\n", None).unwrap();
    let repeated = read_csv("A,B\nx,u\nx,u\nx,v\ny,v\n", None).unwrap();
    let dag = bnkit::Dag::from_edges(["A", "B"], &[("A", "B")]).unwrap();
    let a = mle_fit(&dag, &weighted).unwrap();
    let b = mle_fit(&dag, &repeated).unwrap();
    assert_same(&a, &b, 1e-15);
    assert_eq!(write_csv(&weighted), "A,B,__weight__\nx,u,2\nx,v,1\ny,v,1\n");
}

#[test]
fn csv_missing_cells_and_errors() {
    let t = read_csv(&fixture_text("missing.csv"), None).unwrap();
    assert!(t.has_missing());
    assert_eq!(t.column("A").unwrap()[1], None);
    assert_eq!(t.column("B").unwrap()[2], None);
    assert_eq!(
        read_csv("A,B\nx,y\nz\n", None).unwrap_err(),
        Error::RaggedRow {
            line: 3,
            found: 1,
            expected: 2
        }
    );
    assert_eq!(
        read_csv("A,__weight__\nx,-1\ny,1\n", None).unwrap_err(),
        Error::NegativeWeight { row: 0 }
    );
}
