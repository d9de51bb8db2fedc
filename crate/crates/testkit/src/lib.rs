//! Test-only support for the petriforge suites: an independent dense-matrix
//! firing oracle, a seeded random net generator and an exhaustive enumerator
//! of small nets. Nothing in here touches the semantics module's code paths;
//! the oracle recomputes everything from dense Pre/Post matrices.

use petriforge_core::net::{Marking, NetAnnotations, NetBuilder, PetriNet, PlaceId, TransitionId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference semantics computed from dense `|P| x |T|` weight matrices.
///
/// Built once from a net's arc lists, then answers enabledness and firing
/// questions by plain matrix arithmetic.
pub struct DenseOracle {
    places: usize,
    transitions: usize,
    pre: Vec<Vec<u64>>,  // pre[p][t]
    post: Vec<Vec<u64>>, // post[p][t]
}

impl DenseOracle {
    pub fn new(net: &PetriNet) -> Self {
        let places = net.place_count();
        let transitions = net.transition_count();
        let mut pre = vec![vec![0u64; transitions]; places];
        let mut post = vec![vec![0u64; transitions]; places];
        for (p, t, w) in net.pre_arcs() {
            pre[p.index()][t.index()] = w;
        }
        for (p, t, w) in net.post_arcs() {
            post[p.index()][t.index()] = w;
        }
        DenseOracle {
            places,
            transitions,
            pre,
            post,
        }
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        assert!(t.index() < self.transitions, "oracle: bad transition");
        (0..self.places).all(|p| m.get(PlaceId(p)) >= self.pre[p][t.index()])
    }

    /// Marking after firing `t`, or `None` when `t` is not enabled.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Option<Marking> {
        if !self.is_enabled(m, t) {
            return None;
        }
        let tokens = (0..self.places)
            .map(|p| m.get(PlaceId(p)) - self.pre[p][t.index()] + self.post[p][t.index()])
            .collect();
        Some(Marking::new(tokens))
    }

    pub fn enabled_set(&self, m: &Marking) -> Vec<TransitionId> {
        (0..self.transitions)
            .map(TransitionId)
            .filter(|&t| self.is_enabled(m, t))
            .collect()
    }

    /// Reachable marking set by naive fixed-point iteration: keep adding
    /// successors until nothing changes. Returns `None` when `cap` nodes
    /// would be exceeded.
    pub fn reachable_set(&self, m0: &Marking, cap: usize) -> Option<Vec<Marking>> {
        let mut seen = vec![m0.clone()];
        loop {
            let mut grew = false;
            let snapshot_len = seen.len();
            for i in 0..snapshot_len {
                let m = seen[i].clone();
                for t in self.enabled_set(&m) {
                    let succ = self.fire(&m, t).unwrap();
                    if !seen.contains(&succ) {
                        if seen.len() >= cap {
                            return None;
                        }
                        seen.push(succ);
                        grew = true;
                    }
                }
            }
            if !grew {
                return Some(seen);
            }
        }
    }
}

/// Bounds for the random generator.
#[derive(Clone, Copy, Debug)]
pub struct GenLimits {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_weight: u64,
    pub max_tokens: u64,
    /// Probability (out of 100) that any given place/transition pair gets an
    /// arc in each direction.
    pub arc_percent: u32,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            max_places: 5,
            max_transitions: 5,
            max_weight: 3,
            max_tokens: 3,
            arc_percent: 40,
        }
    }
}

/// Deterministic random net from a seed. Same seed, same net.
pub fn random_net(seed: u64, limits: GenLimits) -> PetriNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let places = rng.gen_range(1..=limits.max_places);
    let transitions = rng.gen_range(1..=limits.max_transitions);
    let mut b = NetBuilder::new();
    let pids: Vec<PlaceId> = (0..places)
        .map(|i| {
            let tokens = rng.gen_range(0..=limits.max_tokens);
            b.place(format!("p{i}"), tokens)
        })
        .collect();
    let tids: Vec<TransitionId> = (0..transitions)
        .map(|i| b.transition(format!("t{i}")))
        .collect();
    for &p in &pids {
        for &t in &tids {
            if rng.gen_range(0..100) < limits.arc_percent {
                b.pre(p, t, rng.gen_range(1..=limits.max_weight));
            }
            if rng.gen_range(0..100) < limits.arc_percent {
                b.post(p, t, rng.gen_range(1..=limits.max_weight));
            }
        }
    }
    b.build()
}

/// Random injective place actions plus (possibly shared) transition actions.
/// Deterministic in the seed.
pub fn random_annotations(net: &PetriNet, seed: u64) -> NetAnnotations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ac71_0000_0000);
    let mut ann = NetAnnotations::default();
    for p in net.place_ids() {
        if rng.gen_range(0..100) < 50 {
            ann.place_actions
                .insert(p, format!("act_{}", net.place_name(p)));
        }
    }
    let pool = ["load", "store", "log"];
    for t in net.transition_ids() {
        if rng.gen_range(0..100) < 50 {
            let name = pool[rng.gen_range(0..pool.len())];
            ann.transition_actions.insert(t, name.to_string());
        }
    }
    ann
}

/// Every net with exactly `places` places and `transitions` transitions,
/// arc weights in `{0 (absent), 1, ..., max_weight}` for both directions and
/// initial tokens in `0..=max_tokens`. The count grows as
/// `(max_weight+1)^(2*places*transitions) * (max_tokens+1)^places`; keep the
/// dimensions small.
pub fn enumerate_nets(
    places: usize,
    transitions: usize,
    max_weight: u64,
    max_tokens: u64,
) -> Vec<PetriNet> {
    let pairs = places * transitions;
    let weight_opts = max_weight + 1; // 0 means no arc
    let token_opts = max_tokens + 1;

    let mut total: u128 = 1;
    for _ in 0..2 * pairs {
        total *= weight_opts as u128;
    }
    for _ in 0..places {
        total *= token_opts as u128;
    }

    let mut nets = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut rest = code;
        let mut b = NetBuilder::new();
        let mut tokens = Vec::with_capacity(places);
        for _ in 0..places {
            tokens.push((rest % token_opts as u128) as u64);
            rest /= token_opts as u128;
        }
        let pids: Vec<PlaceId> = tokens
            .iter()
            .enumerate()
            .map(|(i, &tk)| b.place(format!("p{i}"), tk))
            .collect();
        let tids: Vec<TransitionId> = (0..transitions)
            .map(|i| b.transition(format!("t{i}")))
            .collect();
        for &p in &pids {
            for &t in &tids {
                let w_in = (rest % weight_opts as u128) as u64;
                rest /= weight_opts as u128;
                let w_out = (rest % weight_opts as u128) as u64;
                rest /= weight_opts as u128;
                if w_in > 0 {
                    b.pre(p, t, w_in);
                }
                if w_out > 0 {
                    b.post(p, t, w_out);
                }
            }
        }
        nets.push(b.build());
    }
    nets
}

/// The exhaustive small-net family used by the equivalence suites: every
/// net with up to 2 places and up to 2 transitions, weights <= 2 and
/// initial markings <= 2 tokens per place.
pub fn small_net_family() -> Vec<PetriNet> {
    let mut all = Vec::new();
    for places in 1..=2 {
        for transitions in 1..=2 {
            all.extend(enumerate_nets(places, transitions, 2, 2));
        }
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_net_is_deterministic() {
        let a = random_net(7, GenLimits::default());
        let b = random_net(7, GenLimits::default());
        assert_eq!(a, b);
    }

    #[test]
    fn generated_nets_validate() {
        for seed in 0..50 {
            let net = random_net(seed, GenLimits::default());
            let ann = random_annotations(&net, seed);
            assert!(net.validate(Some(&ann)).is_clean(), "seed {seed}");
        }
    }

    #[test]
    fn enumeration_count_matches_formula() {
        // 1 place, 1 transition, weights <= 1, tokens <= 1:
        // 2 (pre) * 2 (post) * 2 (tokens) = 8 nets.
        assert_eq!(enumerate_nets(1, 1, 1, 1).len(), 8);
    }

    #[test]
    fn small_family_size() {
        // p=1,t=1: 3^2*3 = 27; p=1,t=2: 3^4*3 = 243; p=2,t=1: 3^4*9 = 729;
        // p=2,t=2: 3^8*9 = 59049. Total 60048.
        assert_eq!(small_net_family().len(), 27 + 243 + 729 + 59049);
    }

    #[test]
    fn oracle_fires_b2_by_hand() {
        let net = petriforge_core::samples::b2();
        let oracle = DenseOracle::new(&net);
        let m0 = net.initial_marking().clone();
        let t1 = TransitionId(0);
        assert!(oracle.is_enabled(&m0, t1));
        let m1 = oracle.fire(&m0, t1).unwrap();
        assert_eq!(m1.tokens(), &[0, 3]);
        assert!(!oracle.is_enabled(&m1, t1));
    }
}
