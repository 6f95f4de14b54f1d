//! Packaged cruise-control corpus: specifications, annotated C
//! implementations (one faithful, one with two seeded defects) and their
//! correspondence files, all embedded so the binary needs no data files.

use thiserror::Error;

use crate::annot::{self, AnnotatedProgram, Correspondences};
use crate::ast::Spec;
use crate::diag::Severity;
use crate::parse;
use crate::wf;

pub const CRUISE_SCR: &str = include_str!("../corpus/cruise_control.scr");
pub const CRUISE_KIRBY_SCR: &str = include_str!("../corpus/cruise_kirby_throttle.scr");
pub const TOY_LIGHT_SCR: &str = include_str!("../corpus/toy_light.scr");
pub const CRUISE_IMPL_C: &str = include_str!("../corpus/cruise_impl.c");
pub const CRUISE_IMPL_BUGGY_C: &str = include_str!("../corpus/cruise_impl_buggy.c");
pub const CRUISE_COR: &str = include_str!("../corpus/cruise.cor");
pub const SAC_FRAGMENT_C: &str = include_str!("../corpus/sac_fragment.c");
pub const FRAGMENT_COR: &str = include_str!("../corpus/fragment.cor");

/// Names accepted by [`load_example`].
pub const EXAMPLE_NAMES: [&str; 3] = ["cruise", "cruise-kirby-throttle", "toy-light"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown example `{0}` (expected one of: cruise, cruise-kirby-throttle, toy-light)")]
    Unknown(String),
}

/// One packaged case study: a validated spec plus, where available, the
/// annotated implementations and their correspondence file.
#[derive(Debug)]
pub struct ExampleSet {
    pub name: &'static str,
    pub spec_text: &'static str,
    pub spec: Spec,
    pub clean_impl_text: Option<&'static str>,
    pub clean_impl: Option<AnnotatedProgram>,
    pub buggy_impl_text: Option<&'static str>,
    pub buggy_impl: Option<AnnotatedProgram>,
    pub correspondences_text: Option<&'static str>,
    pub correspondences: Option<Correspondences>,
}

fn load_spec(name: &'static str, text: &'static str) -> Spec {
    let spec = parse::parse_spec_named(text, name)
        .unwrap_or_else(|d| panic!("packaged spec `{name}` failed to parse: {d:?}"));
    let errors: Vec<_> = wf::check_well_formed(&spec)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    assert!(
        errors.is_empty(),
        "packaged spec `{name}` is not well-formed: {errors:?}"
    );
    spec
}

fn load_impl(name: &'static str, text: &'static str) -> AnnotatedProgram {
    annot::parse_annotated_source(text, name)
        .unwrap_or_else(|d| panic!("packaged implementation `{name}` failed to parse: {d:?}"))
}

pub fn load_example(name: &str) -> Result<ExampleSet, CorpusError> {
    match name {
        "cruise" => Ok(ExampleSet {
            name: "cruise",
            spec_text: CRUISE_SCR,
            spec: load_spec("cruise_control.scr", CRUISE_SCR),
            clean_impl_text: Some(CRUISE_IMPL_C),
            clean_impl: Some(load_impl("cruise_impl.c", CRUISE_IMPL_C)),
            buggy_impl_text: Some(CRUISE_IMPL_BUGGY_C),
            buggy_impl: Some(load_impl("cruise_impl_buggy.c", CRUISE_IMPL_BUGGY_C)),
            correspondences_text: Some(CRUISE_COR),
            correspondences: Some(
                annot::parse_correspondences(CRUISE_COR, "cruise.cor")
                    .expect("packaged correspondence file is valid"),
            ),
        }),
        "cruise-kirby-throttle" => Ok(ExampleSet {
            name: "cruise-kirby-throttle",
            spec_text: CRUISE_KIRBY_SCR,
            spec: load_spec("cruise_kirby_throttle.scr", CRUISE_KIRBY_SCR),
            clean_impl_text: None,
            clean_impl: None,
            buggy_impl_text: None,
            buggy_impl: None,
            correspondences_text: None,
            correspondences: None,
        }),
        "toy-light" => Ok(ExampleSet {
            name: "toy-light",
            spec_text: TOY_LIGHT_SCR,
            spec: load_spec("toy_light.scr", TOY_LIGHT_SCR),
            clean_impl_text: None,
            clean_impl: None,
            buggy_impl_text: None,
            buggy_impl: None,
            correspondences_text: None,
            correspondences: None,
        }),
        other => Err(CorpusError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(load_example("cruise2"), Err(CorpusError::Unknown(_))));
    }

    #[test]
    fn all_examples_load_and_are_well_formed() {
        for name in EXAMPLE_NAMES {
            let ex = load_example(name).unwrap();
            assert_eq!(ex.name, name);
        }
    }

    #[test]
    fn cruise_roster_matches_the_case_study() {
        let ex = load_example("cruise").unwrap();
        assert_eq!(ex.spec.monitored.len(), 22);
        assert_eq!(ex.spec.controlled.len(), 13);
        assert_eq!(ex.spec.mode_classes.len(), 1);
        let cc = &ex.spec.mode_classes[0];
        assert_eq!(cc.name, "CC");
        assert_eq!(cc.modes, ["Off", "Inactive", "Cruise", "Override"]);
        assert_eq!(cc.rows.len(), 13);
        assert_eq!(ex.spec.goals.len(), 5);
    }

    #[test]
    fn toy_light_is_minimal() {
        let ex = load_example("toy-light").unwrap();
        assert_eq!(ex.spec.monitored.len(), 1);
        assert_eq!(ex.spec.mode_classes.len(), 1);
        assert_eq!(ex.spec.mode_classes[0].modes.len(), 2);
    }

    #[test]
    fn kirby_variant_encodes_the_throttle() {
        let ex = load_example("cruise-kirby-throttle").unwrap();
        let names: Vec<_> = ex.spec.controlled.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            ["ThrottleOff", "ThrottleAccel", "ThrottleMaintain", "ThrottleDecel"]
        );
    }

    #[test]
    fn clean_impl_passes_sac() {
        let ex = load_example("cruise").unwrap();
        let diags =
            annot::sac_check(ex.clean_impl.as_ref().unwrap(), ex.correspondences.as_ref().unwrap());
        assert!(diags.is_empty(), "clean implementation flagged: {diags:?}");
    }

    #[test]
    fn clean_impl_conforms() {
        let ex = load_example("cruise").unwrap();
        let abs = crate::cord::build_abstraction(ex.clean_impl.as_ref().unwrap(), &ex.spec);
        let report = crate::cord::check_conformance(&abs, &ex.spec);
        assert!(report.initial.is_empty(), "INITIAL: {:?}", report.initial);
        assert!(report.alt.is_empty(), "ALT: {:?}", report.alt);
        assert!(report.olt.is_empty(), "OLT: {:?}", report.olt);
    }

    #[test]
    fn buggy_impl_shows_both_seeded_defects() {
        let ex = load_example("cruise").unwrap();
        let abs = crate::cord::build_abstraction(ex.buggy_impl.as_ref().unwrap(), &ex.spec);
        let report = crate::cord::check_conformance(&abs, &ex.spec);
        assert!(report.initial.is_empty(), "INITIAL: {:?}", report.initial);
        // Wrong target mode: the @T(b_Cruise) transition out of Inactive
        // goes to Override, which no row licenses.
        assert_eq!(report.olt.len(), 1, "OLT: {:?}", report.olt);
        // ... and therefore the Inactive -> Cruise row is unimplemented.
        assert_eq!(report.alt.len(), 1, "ALT: {:?}", report.alt);
        assert!(report.alt[0].message.contains("Inactive -> Cruise"));
        // The dropped Override -> Cruise guard is invisible to both checks:
        // the unrefined pre-state stays compatible with the row's guard.
    }
}
