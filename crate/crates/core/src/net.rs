//! Static Petri-net model: places, transitions, weighted arcs and markings.
//!
//! A net is the 4-tuple (places, transitions, pre, post) plus an initial
//! marking. Arcs are stored sparsely: a key in `pre`/`post` means the arc
//! exists and its weight is >= 1 for valid nets. Nets are plain data and can
//! be built in an invalid state on purpose; [`PetriNet::validate`] reports
//! every violation instead of failing fast.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Index of a place, stable in declaration order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Index of a transition, stable in declaration order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

impl PlaceId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl TransitionId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The distinguished action carried by every unannotated place. Never
/// user-declarable; its guard is permanently true.
pub const NULLACTION: &str = "nullaction";

/// Lookup of an id that is not declared in the net.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnknownId {
    #[error("unknown place index {0}")]
    Place(usize),
    #[error("unknown transition index {0}")]
    Transition(usize),
}

/// Total token assignment over the places of one net.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking {
    tokens: Vec<u64>,
}

impl Marking {
    pub fn new(tokens: Vec<u64>) -> Self {
        Marking { tokens }
    }

    pub fn zeroes(place_count: usize) -> Self {
        Marking {
            tokens: vec![0; place_count],
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        self.tokens[p.0]
    }

    pub fn set(&mut self, p: PlaceId, count: u64) {
        self.tokens[p.0] = count;
    }

    pub fn tokens(&self) -> &[u64] {
        &self.tokens
    }
}

/// Action labels attached to places and transitions (the high-level layer).
///
/// Both maps are partial: an absent place behaves as carrying [`NULLACTION`],
/// an absent transition has no action step at all. Place actions must be
/// injective so the owning place can be recovered from the action name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetAnnotations {
    pub place_actions: BTreeMap<PlaceId, String>,
    pub transition_actions: BTreeMap<TransitionId, String>,
}

impl NetAnnotations {
    pub fn is_empty(&self) -> bool {
        self.place_actions.is_empty() && self.transition_actions.is_empty()
    }

    /// Place carrying the given action, if any. Well-defined because the
    /// place-action map is injective on valid documents.
    pub fn place_of_action(&self, action: &str) -> Option<PlaceId> {
        self.place_actions
            .iter()
            .find(|(_, a)| a.as_str() == action)
            .map(|(p, _)| *p)
    }

    /// Distinct place-action names, ordered by the declaration order of the
    /// place that carries them.
    pub fn place_action_names(&self) -> Vec<&str> {
        self.place_actions.values().map(String::as_str).collect()
    }

    /// Distinct transition-action names in first-declaration order.
    pub fn transition_action_names(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for name in self.transition_actions.values() {
            if !seen.iter().any(|s: &&str| *s == name.as_str()) {
                seen.push(name.as_str());
            }
        }
        seen
    }
}

/// A single violation found by [`PetriNet::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyName { kind: &'static str },
    DuplicateName { kind: &'static str, name: String },
    SharedName { name: String },
    UnknownArcPlace { index: usize },
    UnknownArcTransition { index: usize },
    ZeroWeight { place: String, transition: String, input: bool },
    MarkingSize { expected: usize, actual: usize },
    AnnotationUnknownPlace { index: usize },
    AnnotationUnknownTransition { index: usize },
    AnnotationNotInjective { action: String, first: String, second: String },
    ReservedAction { name: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyName { kind } => write!(f, "{kind} with empty name"),
            Violation::DuplicateName { kind, name } => {
                write!(f, "duplicate {kind} name `{name}`")
            }
            Violation::SharedName { name } => {
                write!(f, "name `{name}` is used for both a place and a transition")
            }
            Violation::UnknownArcPlace { index } => {
                write!(f, "arc references undeclared place index {index}")
            }
            Violation::UnknownArcTransition { index } => {
                write!(f, "arc references undeclared transition index {index}")
            }
            Violation::ZeroWeight { place, transition, input } => {
                let dir = if *input { "->" } else { "<-" };
                write!(f, "arc {place} {dir} {transition} has weight 0 (must be >= 1)")
            }
            Violation::MarkingSize { expected, actual } => {
                write!(f, "initial marking covers {actual} places, net has {expected}")
            }
            Violation::AnnotationUnknownPlace { index } => {
                write!(f, "annotation references undeclared place index {index}")
            }
            Violation::AnnotationUnknownTransition { index } => {
                write!(f, "annotation references undeclared transition index {index}")
            }
            Violation::AnnotationNotInjective { action, first, second } => {
                write!(
                    f,
                    "place action `{action}` attached to both `{first}` and `{second}`"
                )
            }
            Violation::ReservedAction { name } => {
                write!(f, "action name `{name}` is reserved")
            }
        }
    }
}

/// Outcome of validating a net (and optionally its annotations).
/// Diagnostics are data: an empty report means every invariant holds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// A place/transition net with weighted arcs and an initial marking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    pre: BTreeMap<(PlaceId, TransitionId), u64>,
    post: BTreeMap<(PlaceId, TransitionId), u64>,
    initial_marking: Marking,
}

impl PetriNet {
    /// Builds a net directly from its parts without validation.
    pub fn new(
        places: Vec<String>,
        transitions: Vec<String>,
        pre: BTreeMap<(PlaceId, TransitionId), u64>,
        post: BTreeMap<(PlaceId, TransitionId), u64>,
        initial_marking: Marking,
    ) -> Self {
        PetriNet {
            places,
            transitions,
            pre,
            post,
            initial_marking,
        }
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_ids(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0]
    }

    pub fn place_by_name(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|n| n == name).map(PlaceId)
    }

    pub fn transition_by_name(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|n| n == name)
            .map(TransitionId)
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    pub fn pre_arcs(&self) -> impl Iterator<Item = (PlaceId, TransitionId, u64)> + '_ {
        self.pre.iter().map(|(&(p, t), &w)| (p, t, w))
    }

    pub fn post_arcs(&self) -> impl Iterator<Item = (PlaceId, TransitionId, u64)> + '_ {
        self.post.iter().map(|(&(p, t), &w)| (p, t, w))
    }

    /// Weight of the arc from `p` to `t`, 0 when absent.
    pub fn weight_in(&self, p: PlaceId, t: TransitionId) -> u64 {
        self.pre.get(&(p, t)).copied().unwrap_or(0)
    }

    /// Weight of the arc from `t` to `p`, 0 when absent.
    pub fn weight_out(&self, p: PlaceId, t: TransitionId) -> u64 {
        self.post.get(&(p, t)).copied().unwrap_or(0)
    }

    fn check_transition(&self, t: TransitionId) -> Result<(), UnknownId> {
        if t.0 < self.transitions.len() {
            Ok(())
        } else {
            Err(UnknownId::Transition(t.0))
        }
    }

    fn check_place(&self, p: PlaceId) -> Result<(), UnknownId> {
        if p.0 < self.places.len() {
            Ok(())
        } else {
            Err(UnknownId::Place(p.0))
        }
    }

    /// Input places of `t`: every place with a pre-arc into `t`, in
    /// declaration order.
    pub fn input_places(&self, t: TransitionId) -> Result<Vec<PlaceId>, UnknownId> {
        self.check_transition(t)?;
        Ok(self
            .place_ids()
            .filter(|&p| self.pre.contains_key(&(p, t)))
            .collect())
    }

    /// Output places of `t`: every place with a post-arc out of `t`, in
    /// declaration order.
    pub fn output_places(&self, t: TransitionId) -> Result<Vec<PlaceId>, UnknownId> {
        self.check_transition(t)?;
        Ok(self
            .place_ids()
            .filter(|&p| self.post.contains_key(&(p, t)))
            .collect())
    }

    /// Transitions reachable from `p` (those consuming from it), in
    /// declaration order.
    pub fn transitions_of_place(&self, p: PlaceId) -> Result<Vec<TransitionId>, UnknownId> {
        self.check_place(p)?;
        Ok(self
            .transition_ids()
            .filter(|&t| self.pre.contains_key(&(p, t)))
            .collect())
    }

    /// Checks every structural invariant and returns the full list of
    /// violations. Annotation checks run only when `annotations` is given.
    pub fn validate(&self, annotations: Option<&NetAnnotations>) -> ValidationReport {
        let mut violations = Vec::new();

        for (kind, names) in [("place", &self.places), ("transition", &self.transitions)] {
            let mut seen: Vec<&str> = Vec::new();
            for name in names {
                if name.is_empty() {
                    violations.push(Violation::EmptyName { kind });
                } else if seen.contains(&name.as_str()) {
                    violations.push(Violation::DuplicateName {
                        kind,
                        name: name.clone(),
                    });
                } else {
                    seen.push(name);
                }
            }
        }

        for place in &self.places {
            if !place.is_empty() && self.transitions.contains(place) {
                violations.push(Violation::SharedName {
                    name: place.clone(),
                });
            }
        }

        for (map, input) in [(&self.pre, true), (&self.post, false)] {
            for (&(p, t), &w) in map {
                if p.0 >= self.places.len() {
                    violations.push(Violation::UnknownArcPlace { index: p.0 });
                    continue;
                }
                if t.0 >= self.transitions.len() {
                    violations.push(Violation::UnknownArcTransition { index: t.0 });
                    continue;
                }
                if w == 0 {
                    violations.push(Violation::ZeroWeight {
                        place: self.places[p.0].clone(),
                        transition: self.transitions[t.0].clone(),
                        input,
                    });
                }
            }
        }

        if self.initial_marking.len() != self.places.len() {
            violations.push(Violation::MarkingSize {
                expected: self.places.len(),
                actual: self.initial_marking.len(),
            });
        }

        if let Some(ann) = annotations {
            for (&p, action) in &ann.place_actions {
                if p.0 >= self.places.len() {
                    violations.push(Violation::AnnotationUnknownPlace { index: p.0 });
                }
                if action == NULLACTION {
                    violations.push(Violation::ReservedAction {
                        name: action.clone(),
                    });
                }
            }
            // Injectivity of the place-action map (the reverse lookup must
            // be a function).
            let mut by_action: BTreeMap<&str, PlaceId> = BTreeMap::new();
            for (&p, action) in &ann.place_actions {
                if p.0 >= self.places.len() {
                    continue;
                }
                if let Some(&first) = by_action.get(action.as_str()) {
                    violations.push(Violation::AnnotationNotInjective {
                        action: action.clone(),
                        first: self.places[first.0].clone(),
                        second: self.places[p.0].clone(),
                    });
                } else {
                    by_action.insert(action, p);
                }
            }
            for (&t, action) in &ann.transition_actions {
                if t.0 >= self.transitions.len() {
                    violations.push(Violation::AnnotationUnknownTransition { index: t.0 });
                }
                if action == NULLACTION {
                    violations.push(Violation::ReservedAction {
                        name: action.clone(),
                    });
                }
            }
        }

        ValidationReport { violations }
    }
}

/// Incremental construction helper. Does not validate; call
/// [`PetriNet::validate`] on the result when the input is untrusted.
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    tokens: Vec<u64>,
    transitions: Vec<String>,
    pre: BTreeMap<(PlaceId, TransitionId), u64>,
    post: BTreeMap<(PlaceId, TransitionId), u64>,
}

impl NetBuilder {
    pub fn new() -> Self {
        NetBuilder::default()
    }

    pub fn place(&mut self, name: impl Into<String>, tokens: u64) -> PlaceId {
        self.places.push(name.into());
        self.tokens.push(tokens);
        PlaceId(self.places.len() - 1)
    }

    pub fn transition(&mut self, name: impl Into<String>) -> TransitionId {
        self.transitions.push(name.into());
        TransitionId(self.transitions.len() - 1)
    }

    /// Arc from place to transition.
    pub fn pre(&mut self, p: PlaceId, t: TransitionId, weight: u64) -> &mut Self {
        self.pre.insert((p, t), weight);
        self
    }

    /// Arc from transition to place.
    pub fn post(&mut self, p: PlaceId, t: TransitionId, weight: u64) -> &mut Self {
        self.post.insert((p, t), weight);
        self
    }

    pub fn build(self) -> PetriNet {
        PetriNet {
            places: self.places,
            transitions: self.transitions,
            pre: self.pre,
            post: self.post,
            initial_marking: Marking::new(self.tokens),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn valid_net_yields_empty_report() {
        let mut b = NetBuilder::new();
        let p1 = b.place("p1", 1);
        let t1 = b.transition("t1");
        b.pre(p1, t1, 1);
        let net = b.build();
        assert!(net.validate(None).is_clean());
    }

    #[test]
    fn shared_name_is_reported() {
        let mut b = NetBuilder::new();
        b.place("x", 0);
        b.transition("x");
        let net = b.build();
        let report = net.validate(None);
        assert_eq!(
            report.violations,
            vec![Violation::SharedName { name: "x".into() }]
        );
    }

    #[test]
    fn explicit_zero_weight_is_reported() {
        let mut b = NetBuilder::new();
        let p = b.place("p", 0);
        let t = b.transition("t");
        b.pre(p, t, 0);
        let net = b.build();
        let report = net.validate(None);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::ZeroWeight { .. }));
    }

    #[test]
    fn marking_must_be_total() {
        let net = PetriNet::new(
            vec!["p".into()],
            vec![],
            BTreeMap::new(),
            BTreeMap::new(),
            Marking::new(vec![]),
        );
        let report = net.validate(None);
        assert!(matches!(
            report.violations[0],
            Violation::MarkingSize { expected: 1, actual: 0 }
        ));
    }

    #[test]
    fn input_places_of_b2() {
        let net = samples::b2();
        let t1 = net.transition_by_name("t1").unwrap();
        let p1 = net.place_by_name("p1").unwrap();
        assert_eq!(net.input_places(t1).unwrap(), vec![p1]);
    }

    #[test]
    fn source_transition_has_no_inputs() {
        let net = samples::source();
        let t = net.transition_by_name("t").unwrap();
        assert!(net.input_places(t).unwrap().is_empty());
    }

    #[test]
    fn fork_collects_both_inputs() {
        // p1 -> t1 <- p2
        let mut b = NetBuilder::new();
        let p1 = b.place("p1", 0);
        let p2 = b.place("p2", 0);
        let t1 = b.transition("t1");
        b.pre(p1, t1, 1).pre(p2, t1, 1);
        let net = b.build();
        assert_eq!(net.input_places(t1).unwrap(), vec![p1, p2]);
    }

    #[test]
    fn output_places_of_b2() {
        let net = samples::b2();
        let t1 = net.transition_by_name("t1").unwrap();
        let p2 = net.place_by_name("p2").unwrap();
        assert_eq!(net.output_places(t1).unwrap(), vec![p2]);
    }

    #[test]
    fn sink_transition_has_no_outputs() {
        let mut b = NetBuilder::new();
        let p = b.place("p", 1);
        let t = b.transition("t");
        b.pre(p, t, 1);
        let net = b.build();
        assert!(net.output_places(t).unwrap().is_empty());
    }

    #[test]
    fn put_outputs_in_producer_consumer() {
        let (net, _) = samples::producer_consumer();
        let put = net.transition_by_name("put").unwrap();
        let names: Vec<&str> = net
            .output_places(put)
            .unwrap()
            .into_iter()
            .map(|p| net.place_name(p))
            .collect();
        assert_eq!(names, vec!["P_idle", "D_in_buf", "Sem"]);
    }

    #[test]
    fn transitions_of_place_b2() {
        let net = samples::b2();
        let p1 = net.place_by_name("p1").unwrap();
        let t1 = net.transition_by_name("t1").unwrap();
        assert_eq!(net.transitions_of_place(p1).unwrap(), vec![t1]);
    }

    #[test]
    fn isolated_place_feeds_nothing() {
        let mut b = NetBuilder::new();
        let p = b.place("alone", 3);
        b.transition("t");
        let net = b.build();
        assert!(net.transitions_of_place(p).unwrap().is_empty());
    }

    #[test]
    fn semaphore_place_guards_both_transitions() {
        let (net, _) = samples::producer_consumer();
        let sem = net.place_by_name("Sem").unwrap();
        let names: Vec<&str> = net
            .transitions_of_place(sem)
            .unwrap()
            .into_iter()
            .map(|t| net.transition_name(t))
            .collect();
        assert_eq!(names, vec!["put", "get"]);
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let net = samples::b2();
        assert_eq!(
            net.input_places(TransitionId(9)),
            Err(UnknownId::Transition(9))
        );
        assert_eq!(
            net.transitions_of_place(PlaceId(9)),
            Err(UnknownId::Place(9))
        );
    }

    #[test]
    fn transpose_relation_between_graph_views() {
        let (net, _) = samples::producer_consumer();
        for t in net.transition_ids() {
            for p in net.place_ids() {
                let forward = net.input_places(t).unwrap().contains(&p);
                let backward = net.transitions_of_place(p).unwrap().contains(&t);
                assert_eq!(forward, backward, "transpose mismatch at {t:?}/{p:?}");
            }
        }
    }

    #[test]
    fn noninjective_place_actions_reported() {
        let mut b = NetBuilder::new();
        let p1 = b.place("p1", 0);
        let p2 = b.place("p2", 0);
        b.transition("t");
        let net = b.build();
        let mut ann = NetAnnotations::default();
        ann.place_actions.insert(p1, "w".into());
        ann.place_actions.insert(p2, "w".into());
        let report = net.validate(Some(&ann));
        assert!(matches!(
            report.violations[0],
            Violation::AnnotationNotInjective { .. }
        ));
    }

    #[test]
    fn nullaction_is_reserved() {
        let mut b = NetBuilder::new();
        let p = b.place("p", 0);
        b.transition("t");
        let net = b.build();
        let mut ann = NetAnnotations::default();
        ann.place_actions.insert(p, NULLACTION.into());
        let report = net.validate(Some(&ann));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ReservedAction { .. })));
    }
}
