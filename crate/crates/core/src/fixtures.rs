//! Bundled example networks.

use crate::model::ReactionNetwork;
use crate::parser::{parse_network, NetworkSource};

pub const ARCHETYPAL: &str = include_str!("../../../networks/archetypal.crn");
pub const ARCHETYPAL_MOD: &str = include_str!("../../../networks/archetypal_mod.crn");
pub const ENVZ_OMPR: &str = include_str!("../../../networks/envz_ompr.crn");
pub const ENVZ_OMPR_MOD: &str = include_str!("../../../networks/envz_ompr_mod.crn");
pub const FUTILE_CYCLE: &str = include_str!("../../../networks/futile_cycle.crn");
pub const FUTILE_CYCLE_MOD: &str = include_str!("../../../networks/futile_cycle_mod.crn");

/// `(file stem, source)` for every bundled network.
pub const ALL: [(&str, &str); 6] = [
    ("archetypal", ARCHETYPAL),
    ("archetypal_mod", ARCHETYPAL_MOD),
    ("envz_ompr", ENVZ_OMPR),
    ("envz_ompr_mod", ENVZ_OMPR_MOD),
    ("futile_cycle", FUTILE_CYCLE),
    ("futile_cycle_mod", FUTILE_CYCLE_MOD),
];

fn load(name: &str, text: &str) -> ReactionNetwork {
    parse_network(&NetworkSource::new(text, name)).unwrap_or_else(|e| panic!("bundled network {name}: {e:?}"))
}

pub fn by_name(name: &str) -> Option<ReactionNetwork> {
    ALL.iter().find(|(n, _)| *n == name).map(|(n, t)| load(n, t))
}

pub fn archetypal() -> ReactionNetwork {
    load("archetypal", ARCHETYPAL)
}

pub fn archetypal_mod() -> ReactionNetwork {
    load("archetypal_mod", ARCHETYPAL_MOD)
}

pub fn envz_ompr() -> ReactionNetwork {
    load("envz_ompr", ENVZ_OMPR)
}

pub fn envz_ompr_mod() -> ReactionNetwork {
    load("envz_ompr_mod", ENVZ_OMPR_MOD)
}

pub fn futile_cycle() -> ReactionNetwork {
    load("futile_cycle", FUTILE_CYCLE)
}

pub fn futile_cycle_mod() -> ReactionNetwork {
    load("futile_cycle_mod", FUTILE_CYCLE_MOD)
}
