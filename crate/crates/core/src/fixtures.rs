//! Bundled case-study model: a mobile personal emergency response system
//! whose location goal has a four-row context-dependent interpretation.
//!
//! The document itself lists which numbers are illustrative in its `notes`.

use crate::format::parse_model;
use crate::model::CgmModel;
use crate::scalar::Scalar;

pub const MPERS_DOCUMENT: &str = include_str!("../fixtures/mpers.json");

pub const G_LOC: &str = "g_loc";
pub const LAST_KNOWN_LOCATION: &str = "t_last_known";
pub const VOICE_CALL: &str = "t_voice_call";
pub const TRIANGULATION: &str = "t_triangulation";
pub const GPS: &str = "t_gps";

/// Four documented context sets with their expected verdicts.
pub const VOLUNTEER_SETS: [(&str, &[&str], bool); 4] = [
    ("set 1", &["C2", "C4"], true),
    ("set 2", &["C2", "C10"], false),
    ("set 3", &["C5", "C9"], true),
    ("set 4", &["C2", "C5", "C9", "C10"], true),
];

pub fn mpers<S: Scalar>() -> CgmModel<S> {
    parse_model(MPERS_DOCUMENT).expect("bundled fixture is valid")
}
