//! Small textbook networks bundled with the library.

use crate::error::{Error, Result};
use crate::io::parse_bif;
use crate::model::DiscreteBayesianNetwork;

const NETWORKS: &[(&str, &str)] = &[
    ("asia", include_str!("../networks/asia.bif")),
    ("cancer", include_str!("../networks/cancer.bif")),
    ("earthquake", include_str!("../networks/earthquake.bif")),
    ("sprinkler", include_str!("../networks/sprinkler.bif")),
    ("student", include_str!("../networks/student.bif")),
    ("survey", include_str!("../networks/survey.bif")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    NETWORKS.iter().map(|(n, _)| *n)
}

/// BIF source of a bundled network.
pub fn source(name: &str) -> Option<&'static str> {
    NETWORKS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn network(name: &str) -> Result<DiscreteBayesianNetwork> {
    let text = source(name).ok_or_else(|| Error::InvalidArgument(format!("no bundled network `{name}`")))?;
    parse_bif(text)
}

/// Cloudy → {Sprinkler, Rain} → WetGrass.
pub fn sprinkler() -> DiscreteBayesianNetwork {
    network("sprinkler").expect("bundled network parses")
}

pub fn asia() -> DiscreteBayesianNetwork {
    network("asia").expect("bundled network parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_network_parses() {
        for name in names() {
            let bn = network(name).unwrap();
            assert!(bn.dag().node_count() >= 4, "{name}");
        }
        assert_eq!(sprinkler().dag().edge_count(), 4);
        assert_eq!(asia().dag().edge_count(), 8);
        assert!(network("alarm").is_err());
    }
}
