//! Moves a network between BIF and UAI, and a dataset through CSV.

use bnkit::catalog;
use bnkit::io::{parse_bif, parse_uai, read_csv, serialize_bif, serialize_uai, write_csv};
use bnkit::simulate::forward_sample;

fn main() -> bnkit::Result<()> {
    let bn = catalog::network("survey")?;
    let bif = serialize_bif(&bn);
    let uai = serialize_uai(&parse_bif(&bif)?);
    let mut back = parse_uai(&uai)?;
    println!("{uai}");
    // UAI has no slot for the network name or properties
    back.metadata = bn.metadata.clone();
    println!("BIF -> UAI -> BIF unchanged: {}", serialize_bif(&back) == bif);

    let sample = forward_sample(&bn, 5, 3)?;
    let csv = write_csv(&sample);
    print!("{csv}");
    let schema: Vec<_> = bn.metas().cloned().collect();
    assert_eq!(read_csv(&csv, Some(&schema))?, sample);

    match parse_bif("variable A {\n  type discrete [ 2 ] { a, b }\n}\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e} (kind {}, at {:?})", e.kind(), e.position()),
    }
    Ok(())
}
