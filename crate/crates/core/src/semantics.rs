//! Evolution semantics: the plain firing rule plus the guarded-event system
//! that executes a net under one of four policies.
//!
//! The event system mirrors a two-level guarded-event embedding: transitions
//! fire in one step (`Basic`) or in staged steps that first consume input
//! tokens and then run the actions attached to output places and/or the
//! fired transition before the deferred output tokens land. `trans_places`
//! tracks (transition, output place) pairs whose tokens are still pending.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::net::{
    Marking, NetAnnotations, PetriNet, PlaceId, TransitionId, UnknownId, Violation, NULLACTION,
};

/// Which evolution scheme drives the event system.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    Basic,
    PlaceActions,
    TransitionActions,
    PlaceAndTransitionActions,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::Basic,
        Policy::PlaceActions,
        Policy::TransitionActions,
        Policy::PlaceAndTransitionActions,
    ];

    pub fn uses_place_actions(self) -> bool {
        matches!(self, Policy::PlaceActions | Policy::PlaceAndTransitionActions)
    }

    pub fn uses_transition_actions(self) -> bool {
        matches!(
            self,
            Policy::TransitionActions | Policy::PlaceAndTransitionActions
        )
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Policy::Basic => "basic",
            Policy::PlaceActions => "place-actions",
            Policy::TransitionActions => "transition-actions",
            Policy::PlaceAndTransitionActions => "place-and-transition-actions",
        };
        f.write_str(s)
    }
}

/// One step of the event system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    /// Basic policy: complete firing of a transition.
    EventTr(TransitionId),
    /// Staged policies: consume input tokens, stage actions and deferred
    /// outputs.
    FireTransition(TransitionId),
    /// Place-actions policy: run one pending place action and release its
    /// deferred tokens.
    PlaceAction(String),
    /// Transition-actions policy: run the fired transition's action and
    /// release all its output tokens.
    TransitionAction(TransitionId),
    /// Combined policy staging: promote a staged transition action to its
    /// launch guard.
    EnableTransitionActionGuard(TransitionId),
    /// Combined policy staging: promote a staged place action, releasing the
    /// place's deferred tokens.
    EnablePlaceActionGuard(PlaceId),
    /// Combined policy: run a transition action whose launch guard is set.
    LaunchTransitionAction(String),
    /// Combined policy: run a place action whose launch guard is set.
    LaunchPlaceAction(String),
}

impl Event {
    /// Human-readable label, resolving ids against the net.
    pub fn label(&self, net: &PetriNet) -> String {
        match self {
            Event::EventTr(t) => format!("EventTr({})", net.transition_name(*t)),
            Event::FireTransition(t) => format!("FireTransition({})", net.transition_name(*t)),
            Event::PlaceAction(a) => format!("PlaceAction({a})"),
            Event::TransitionAction(t) => {
                format!("TransitionAction({})", net.transition_name(*t))
            }
            Event::EnableTransitionActionGuard(t) => {
                format!("EnableTransitionActionGuard({})", net.transition_name(*t))
            }
            Event::EnablePlaceActionGuard(p) => {
                format!("EnablePlaceActionGuard({})", net.place_name(*p))
            }
            Event::LaunchTransitionAction(a) => format!("LaunchTransitionAction({a})"),
            Event::LaunchPlaceAction(a) => format!("LaunchPlaceAction({a})"),
        }
    }
}

/// Where a performed action was attached.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionSource {
    Place(PlaceId),
    Transition(TransitionId),
}

/// One performed action, in execution order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionRecord {
    pub action: String,
    pub source: ActionSource,
}

/// Full runtime state of the event system.
///
/// `guard_*` maps hold launch guards keyed by action name, `enabled_*` maps
/// hold the combined policy's staging flags. The action log and the
/// overwrite counter are observation channels; state-space exploration
/// excludes them from node identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedState {
    pub marking: Marking,
    pub guard_p_actions: BTreeMap<String, bool>,
    pub enabled_p_actions: BTreeMap<String, bool>,
    pub guard_t_actions: BTreeMap<String, bool>,
    pub enabled_t_actions: BTreeMap<TransitionId, bool>,
    pub trans_places: BTreeSet<(TransitionId, PlaceId)>,
    pub action_log: Vec<ActionRecord>,
    /// Times a place-action guard was re-enabled while still pending (the
    /// place-actions policy permits this; the combined policy's priority
    /// rule prevents it).
    pub guard_overwrites: u64,
}

impl EmbeddedState {
    /// True when no action is staged, no launch guard is set (ignoring the
    /// permanently-true `nullaction`) and no output tokens are pending.
    pub fn quiescent(&self) -> bool {
        self.trans_places.is_empty()
            && !self.enabled_p_actions.values().any(|&v| v)
            && !self.enabled_t_actions.values().any(|&v| v)
            && !self.guard_t_actions.values().any(|&v| v)
            && !self
                .guard_p_actions
                .iter()
                .any(|(a, &v)| v && a != NULLACTION)
    }
}

/// Why a simulation run ended.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StopReason {
    StepsExhausted,
    Deadlock,
    CapacityStop,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::StepsExhausted => "steps exhausted",
            StopReason::Deadlock => "deadlock",
            StopReason::CapacityStop => "capacity",
        };
        f.write_str(s)
    }
}

/// A recorded run: the initial state and each applied event with the state
/// it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: EmbeddedState,
    pub steps: Vec<(Event, EmbeddedState)>,
    pub stop: StopReason,
}

impl Trace {
    pub fn final_state(&self) -> &EmbeddedState {
        self.steps.last().map(|(_, s)| s).unwrap_or(&self.initial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Unknown(#[from] UnknownId),
    #[error("transition `{transition}` is not enabled: {detail}")]
    NotEnabled { transition: String, detail: String },
    #[error("event {event} is not enabled in the current state")]
    EventNotEnabled { event: String },
    #[error("annotations do not fit policy: {0}")]
    AnnotationMismatch(String),
}

/// True iff every input place of `t` holds at least the input-arc weight.
/// Transitions without inputs are always enabled.
pub fn is_enabled(net: &PetriNet, m: &Marking, t: TransitionId) -> Result<bool, UnknownId> {
    Ok(net
        .input_places(t)?
        .into_iter()
        .all(|p| m.get(p) >= net.weight_in(p, t)))
}

/// Fires `t`: subtract input weights, add output weights. Self-loop places
/// get both deltas.
pub fn fire(net: &PetriNet, m: &Marking, t: TransitionId) -> Result<Marking, SemanticsError> {
    if !is_enabled(net, m, t)? {
        let detail = net
            .input_places(t)
            .unwrap()
            .into_iter()
            .filter(|&p| m.get(p) < net.weight_in(p, t))
            .map(|p| {
                format!(
                    "{} has {} of {} tokens",
                    net.place_name(p),
                    m.get(p),
                    net.weight_in(p, t)
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        return Err(SemanticsError::NotEnabled {
            transition: net.transition_name(t).to_string(),
            detail,
        });
    }
    let mut out = m.clone();
    for p in net.place_ids() {
        let v = m.get(p) - net.weight_in(p, t) + net.weight_out(p, t);
        out.set(p, v);
    }
    Ok(out)
}

/// Transitions enabled at `m`, in declaration order.
pub fn enabled_set(net: &PetriNet, m: &Marking) -> Vec<TransitionId> {
    net.transition_ids()
        .filter(|&t| is_enabled(net, m, t).unwrap())
        .collect()
}

/// A net, its annotations and a policy, bundled for the event system.
pub struct Embedding<'a> {
    net: &'a PetriNet,
    annotations: &'a NetAnnotations,
    policy: Policy,
}

impl<'a> Embedding<'a> {
    /// Checks the annotations against the net before anything runs.
    /// `Basic` ignores annotations entirely.
    pub fn new(
        net: &'a PetriNet,
        annotations: &'a NetAnnotations,
        policy: Policy,
    ) -> Result<Self, SemanticsError> {
        if policy != Policy::Basic {
            let report = net.validate(Some(annotations));
            let bad: Vec<String> = report
                .violations
                .iter()
                .filter(|v| {
                    matches!(
                        v,
                        Violation::AnnotationUnknownPlace { .. }
                            | Violation::AnnotationUnknownTransition { .. }
                            | Violation::AnnotationNotInjective { .. }
                            | Violation::ReservedAction { .. }
                    )
                })
                .map(|v| v.to_string())
                .collect();
            if !bad.is_empty() {
                return Err(SemanticsError::AnnotationMismatch(bad.join("; ")));
            }
        }
        Ok(Embedding {
            net,
            annotations,
            policy,
        })
    }

    pub fn net(&self) -> &PetriNet {
        self.net
    }

    pub fn annotations(&self) -> &NetAnnotations {
        self.annotations
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// Initial state: marking M0, every launch guard false except the
    /// permanently-true `nullaction`, all staging flags false, nothing
    /// pending.
    pub fn init_state(&self) -> EmbeddedState {
        let mut guard_p = BTreeMap::new();
        let mut enabled_p = BTreeMap::new();
        let mut guard_t = BTreeMap::new();
        let mut enabled_t = BTreeMap::new();

        if self.policy.uses_place_actions() {
            for a in self.annotations.place_action_names() {
                guard_p.insert(a.to_string(), false);
            }
            guard_p.insert(NULLACTION.to_string(), true);
        }
        if self.policy == Policy::PlaceAndTransitionActions {
            for a in guard_p.keys() {
                enabled_p.insert(a.clone(), false);
            }
            for a in self.annotations.transition_action_names() {
                guard_t.insert(a.to_string(), false);
            }
        }
        if self.policy.uses_transition_actions() {
            for t in self.net.transition_ids() {
                enabled_t.insert(t, false);
            }
        }

        EmbeddedState {
            marking: self.net.initial_marking().clone(),
            guard_p_actions: guard_p,
            enabled_p_actions: enabled_p,
            guard_t_actions: guard_t,
            enabled_t_actions: enabled_t,
            trans_places: BTreeSet::new(),
            action_log: Vec::new(),
            guard_overwrites: 0,
        }
    }

    /// Output places of `t` that carry an action, with the action name.
    fn annotated_outputs(&self, t: TransitionId) -> Vec<(PlaceId, &str)> {
        self.net
            .output_places(t)
            .unwrap()
            .into_iter()
            .filter_map(|p| {
                self.annotations
                    .place_actions
                    .get(&p)
                    .map(|a| (p, a.as_str()))
            })
            .collect()
    }

    /// First pending pair for `place`, lowest transition first.
    fn pending_pair_for(&self, s: &EmbeddedState, place: PlaceId) -> Option<TransitionId> {
        s.trans_places
            .iter()
            .find(|&&(_, p)| p == place)
            .map(|&(t, _)| t)
    }

    /// The event menu at `s`, in a fixed kind-major, declaration-order
    /// enumeration.
    pub fn enabled_events(&self, s: &EmbeddedState) -> Vec<Event> {
        let mut events = Vec::new();
        match self.policy {
            Policy::Basic => {
                for t in enabled_set(self.net, &s.marking) {
                    events.push(Event::EventTr(t));
                }
            }
            Policy::PlaceActions => {
                // No priority here: firings and pending actions interleave
                // freely, so an already-enabled guard can be overwritten.
                for t in enabled_set(self.net, &s.marking) {
                    events.push(Event::FireTransition(t));
                }
                for (&p, a) in &self.annotations.place_actions {
                    if s.guard_p_actions.get(a).copied().unwrap_or(false)
                        && self.pending_pair_for(s, p).is_some()
                    {
                        events.push(Event::PlaceAction(a.clone()));
                    }
                }
            }
            Policy::TransitionActions => {
                let pending = s.enabled_t_actions.values().any(|&v| v);
                if !pending {
                    for t in enabled_set(self.net, &s.marking) {
                        events.push(Event::FireTransition(t));
                    }
                }
                for t in self.net.transition_ids() {
                    if s.enabled_t_actions.get(&t).copied().unwrap_or(false) {
                        events.push(Event::TransitionAction(t));
                    }
                }
            }
            Policy::PlaceAndTransitionActions => {
                // Priority rule: a new firing is offered only once every
                // stage of the previous one has completed.
                if s.quiescent() {
                    for t in enabled_set(self.net, &s.marking) {
                        events.push(Event::FireTransition(t));
                    }
                }
                for t in self.net.transition_ids() {
                    if s.enabled_t_actions.get(&t).copied().unwrap_or(false) {
                        events.push(Event::EnableTransitionActionGuard(t));
                    }
                }
                for (&p, a) in &self.annotations.place_actions {
                    if s.enabled_p_actions.get(a).copied().unwrap_or(false)
                        && self.pending_pair_for(s, p).is_some()
                    {
                        events.push(Event::EnablePlaceActionGuard(p));
                    }
                }
                for (a, &g) in &s.guard_t_actions {
                    if g {
                        events.push(Event::LaunchTransitionAction(a.clone()));
                    }
                }
                for (&_p, a) in &self.annotations.place_actions {
                    if s.guard_p_actions.get(a).copied().unwrap_or(false) {
                        events.push(Event::LaunchPlaceAction(a.clone()));
                    }
                }
            }
        }
        events
    }

    /// Applies `e` after checking it is offered at `s`.
    pub fn apply(&self, s: &EmbeddedState, e: &Event) -> Result<EmbeddedState, SemanticsError> {
        if !self.enabled_events(s).contains(e) {
            return Err(SemanticsError::EventNotEnabled {
                event: e.label(self.net),
            });
        }
        Ok(self.apply_unchecked(s, e))
    }

    /// Applies an event taken from [`Embedding::enabled_events`].
    pub(crate) fn apply_unchecked(&self, s: &EmbeddedState, e: &Event) -> EmbeddedState {
        let mut next = s.clone();
        match e {
            Event::EventTr(t) => {
                next.marking = fire(self.net, &s.marking, *t).expect("enabled event");
            }
            Event::FireTransition(t) => self.fire_staged(&mut next, *t),
            Event::PlaceAction(a) => {
                let place = self
                    .annotations
                    .place_of_action(a)
                    .expect("action has a place");
                let tr = self.pending_pair_for(s, place).expect("pending pair");
                let v = next.marking.get(place) + self.net.weight_out(place, tr);
                next.marking.set(place, v);
                next.guard_p_actions.insert(a.clone(), false);
                next.trans_places.remove(&(tr, place));
                next.action_log.push(ActionRecord {
                    action: a.clone(),
                    source: ActionSource::Place(place),
                });
            }
            Event::TransitionAction(t) => {
                for p in self.net.output_places(*t).unwrap() {
                    let v = next.marking.get(p) + self.net.weight_out(p, *t);
                    next.marking.set(p, v);
                }
                next.enabled_t_actions.insert(*t, false);
                let action = self.annotations.transition_actions[t].clone();
                next.action_log.push(ActionRecord {
                    action,
                    source: ActionSource::Transition(*t),
                });
            }
            Event::EnableTransitionActionGuard(t) => {
                let action = &self.annotations.transition_actions[t];
                next.guard_t_actions.insert(action.clone(), true);
                next.enabled_t_actions.insert(*t, false);
            }
            Event::EnablePlaceActionGuard(p) => {
                let action = self.annotations.place_actions[p].clone();
                let tr = self.pending_pair_for(s, *p).expect("pending pair");
                let v = next.marking.get(*p) + self.net.weight_out(*p, tr);
                next.marking.set(*p, v);
                next.guard_p_actions.insert(action.clone(), true);
                next.enabled_p_actions.insert(action, false);
                next.trans_places.remove(&(tr, *p));
            }
            Event::LaunchTransitionAction(a) => {
                next.guard_t_actions.insert(a.clone(), false);
                // Shared action names lose the exact origin; report the
                // first transition carrying the name.
                let source = self
                    .annotations
                    .transition_actions
                    .iter()
                    .find(|(_, name)| name.as_str() == a)
                    .map(|(&t, _)| t)
                    .expect("action has a transition");
                next.action_log.push(ActionRecord {
                    action: a.clone(),
                    source: ActionSource::Transition(source),
                });
            }
            Event::LaunchPlaceAction(a) => {
                let place = self
                    .annotations
                    .place_of_action(a)
                    .expect("action has a place");
                next.guard_p_actions.insert(a.clone(), false);
                next.action_log.push(ActionRecord {
                    action: a.clone(),
                    source: ActionSource::Place(place),
                });
            }
        }
        next
    }

    /// Staged firing common to the three non-basic policies: consume input
    /// tokens, deliver tokens to action-less output places at once, defer
    /// the rest behind their actions.
    fn fire_staged(&self, next: &mut EmbeddedState, t: TransitionId) {
        for p in self.net.input_places(t).unwrap() {
            let v = next.marking.get(p) - self.net.weight_in(p, t);
            next.marking.set(p, v);
        }

        match self.policy {
            Policy::PlaceActions => {
                for p in self.net.output_places(t).unwrap() {
                    match self.annotations.place_actions.get(&p) {
                        Some(a) => {
                            if next.guard_p_actions.get(a).copied().unwrap_or(false) {
                                next.guard_overwrites += 1;
                            }
                            next.guard_p_actions.insert(a.clone(), true);
                            next.trans_places.insert((t, p));
                        }
                        None => {
                            let v = next.marking.get(p) + self.net.weight_out(p, t);
                            next.marking.set(p, v);
                        }
                    }
                }
            }
            Policy::TransitionActions => {
                if self.annotations.transition_actions.contains_key(&t) {
                    next.enabled_t_actions.insert(t, true);
                } else {
                    // No action step: the firing completes at once.
                    for p in self.net.output_places(t).unwrap() {
                        let v = next.marking.get(p) + self.net.weight_out(p, t);
                        next.marking.set(p, v);
                    }
                }
            }
            Policy::PlaceAndTransitionActions => {
                debug_assert!(next.trans_places.is_empty(), "priority guard violated");
                for p in self.net.output_places(t).unwrap() {
                    match self.annotations.place_actions.get(&p) {
                        Some(a) => {
                            debug_assert!(
                                !next.enabled_p_actions.get(a).copied().unwrap_or(false),
                                "priority guard violated"
                            );
                            next.enabled_p_actions.insert(a.clone(), true);
                            next.trans_places.insert((t, p));
                        }
                        None => {
                            let v = next.marking.get(p) + self.net.weight_out(p, t);
                            next.marking.set(p, v);
                        }
                    }
                }
                if self.annotations.transition_actions.contains_key(&t) {
                    next.enabled_t_actions.insert(t, true);
                }
            }
            Policy::Basic => unreachable!("basic policy has no staged firing"),
        }
    }

    /// Seeded run: repeatedly pick uniformly among the enabled events and
    /// apply, stopping on deadlock, exhausted steps, or as soon as a step
    /// would push some place above `capacity`.
    pub fn simulate(&self, steps: usize, seed: u64, capacity: Option<u64>) -> Trace {
        self.simulate_with_observer(steps, seed, capacity, |_| {})
    }

    /// Like [`Embedding::simulate`], invoking `observer` for every action
    /// the run performs.
    pub fn simulate_with_observer(
        &self,
        steps: usize,
        seed: u64,
        capacity: Option<u64>,
        mut observer: impl FnMut(&ActionRecord),
    ) -> Trace {
        let initial = self.init_state();
        let mut current = initial.clone();
        let mut recorded = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stop = StopReason::StepsExhausted;

        for _ in 0..steps {
            let events = self.enabled_events(&current);
            if events.is_empty() {
                stop = StopReason::Deadlock;
                break;
            }
            let event = events[rng.gen_range(0..events.len())].clone();
            let next = self.apply_unchecked(&current, &event);
            if let Some(cap) = capacity {
                if next.marking.tokens().iter().any(|&v| v > cap) {
                    stop = StopReason::CapacityStop;
                    break;
                }
            }
            for record in &next.action_log[current.action_log.len()..] {
                observer(record);
            }
            recorded.push((event, next.clone()));
            current = next;
        }

        Trace {
            initial,
            steps: recorded,
            stop,
        }
    }
}
