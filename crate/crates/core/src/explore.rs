//! Breadth-first enumeration of reachable states and a compact transition table.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::Signed;

use crate::game::{GameError, GameModel, StateKind};
use crate::state::{rational_to_f64, StateId};

/// The states reachable from `x0` in at most `depth` transitions of positive probability.
pub fn reachable<G: GameModel + ?Sized>(
    game: &G,
    x0: &StateId,
    depth: usize,
) -> Result<BTreeSet<StateId>, GameError> {
    if !game.contains(x0) {
        return Err(GameError::UnknownState(x0.clone()));
    }
    let mut seen = BTreeSet::from([x0.clone()]);
    let mut layer = vec![x0.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for x in &layer {
            if !game.is_active(x) {
                continue;
            }
            let (na, nb) = game.action_counts(x);
            for a in 0..na {
                for b in 0..nb {
                    for (t, p) in game.transition(x, a, b) {
                        if p.is_positive() && game.contains(&t) && seen.insert(t.clone()) {
                            next.push(t);
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(seen)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Active,
    Absorbing(f64),
    /// Unexpanded: beyond the depth limit, or outside the game.
    Frontier,
}

/// Reachable states in breadth-first order with float transitions in CSR layout.
///
/// States are numbered layer by layer, sorted within each layer, so the
/// numbering is deterministic. Successors of an expanded state of depth d
/// have depth at most d + 1.
#[derive(Clone, Debug)]
pub struct ExploredSet {
    pub states: Vec<StateId>,
    pub depth: Vec<u32>,
    pub nodes: Vec<Node>,
    index: HashMap<StateId, u32>,
    na: Vec<u32>,
    nb: Vec<u32>,
    /// Per state, first cell index (length states + 1).
    cell_start: Vec<u32>,
    /// Per cell, first successor index (length cells + 1).
    succ_start: Vec<u32>,
    succ: Vec<u32>,
    prob: Vec<f64>,
}

impl ExploredSet {
    /// Explores from `roots`, expanding active states of depth `< max_depth`.
    pub fn build<G: GameModel + ?Sized>(
        game: &G,
        roots: &[StateId],
        max_depth: usize,
        cap: usize,
    ) -> Result<Self, GameError> {
        let mut layers: Vec<Vec<StateId>> = Vec::new();
        let mut seen: HashSet<StateId> = HashSet::new();
        let mut layer: Vec<StateId> = Vec::new();
        for r in roots {
            if !game.contains(r) {
                return Err(GameError::UnknownState(r.clone()));
            }
            if seen.insert(r.clone()) {
                layer.push(r.clone());
            }
        }
        layer.sort();
        let mut d = 0usize;
        while !layer.is_empty() {
            let mut next = Vec::new();
            if d < max_depth {
                for x in &layer {
                    if !game.is_active(x) {
                        continue;
                    }
                    let (na, nb) = game.action_counts(x);
                    for a in 0..na {
                        for b in 0..nb {
                            for (t, p) in game.transition(x, a, b) {
                                if p.is_positive() && seen.insert(t.clone()) {
                                    next.push(t);
                                }
                            }
                        }
                    }
                    if seen.len() > cap {
                        return Err(GameError::StateCap(cap));
                    }
                }
            }
            next.sort();
            layers.push(std::mem::replace(&mut layer, next));
            d += 1;
        }

        let total: usize = layers.iter().map(Vec::len).sum();
        let mut states = Vec::with_capacity(total);
        let mut depth = Vec::with_capacity(total);
        for (d, l) in layers.into_iter().enumerate() {
            depth.extend(std::iter::repeat_n(d as u32, l.len()));
            states.extend(l);
        }
        let index: HashMap<StateId, u32> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();

        let mut nodes = Vec::with_capacity(total);
        let mut na_v = Vec::with_capacity(total);
        let mut nb_v = Vec::with_capacity(total);
        let mut cell_start = Vec::with_capacity(total + 1);
        let mut succ_start = vec![0u32];
        let mut succ = Vec::new();
        let mut prob = Vec::new();
        cell_start.push(0u32);
        for (i, x) in states.iter().enumerate() {
            let kind = game.kind(x);
            let node = match kind {
                StateKind::Absorbing(g) => Node::Absorbing(rational_to_f64(&g)),
                StateKind::Active if (depth[i] as usize) < max_depth => Node::Active,
                _ => Node::Frontier,
            };
            let (mut na, mut nb) = (0, 0);
            if node == Node::Active {
                (na, nb) = game.action_counts(x);
                for a in 0..na {
                    for b in 0..nb {
                        for (t, p) in game.transition(x, a, b) {
                            if p.is_positive() {
                                succ.push(index[&t]);
                                prob.push(rational_to_f64(&p));
                            }
                        }
                        succ_start.push(succ.len() as u32);
                    }
                }
            }
            nodes.push(node);
            na_v.push(na as u32);
            nb_v.push(nb as u32);
            cell_start.push(cell_start[i] + (na * nb) as u32);
        }
        Ok(ExploredSet {
            states,
            depth,
            nodes,
            index,
            na: na_v,
            nb: nb_v,
            cell_start,
            succ_start,
            succ,
            prob,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, x: &StateId) -> Option<usize> {
        self.index.get(x).map(|&i| i as usize)
    }

    pub fn action_counts(&self, i: usize) -> (usize, usize) {
        (self.na[i] as usize, self.nb[i] as usize)
    }

    /// Successor indices and probabilities of the cell `(a, b)` at state `i`.
    pub fn successors(&self, i: usize, a: usize, b: usize) -> (&[u32], &[f64]) {
        let cell = self.cell_start[i] as usize + a * self.nb[i] as usize + b;
        let lo = self.succ_start[cell] as usize;
        let hi = self.succ_start[cell + 1] as usize;
        (&self.succ[lo..hi], &self.prob[lo..hi])
    }

    /// Expected value of `v` after `(a, b)` at state `i`.
    pub fn expect(&self, i: usize, a: usize, b: usize, v: &[f64]) -> f64 {
        let (s, p) = self.successors(i, a, b);
        s.iter().zip(p).map(|(&j, &q)| q * v[j as usize]).sum()
    }

    pub fn frontier_count(&self) -> usize {
        self.nodes.iter().filter(|n| **n == Node::Frontier).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{quitting_simple, LehrerSorin};
    use crate::game::RecursiveGame;
    use crate::state::rat;

    #[test]
    fn depth_two_from_origin() {
        let g = LehrerSorin::new(100);
        let r = reachable(&g, &StateId::pair(0, 0), 2).unwrap();
        let expect: BTreeSet<StateId> = [(0, 0), (1, 0), (2, 0), (0, -1), (0, 1), (1, -1), (1, 1)]
            .into_iter()
            .map(|(x, y)| StateId::pair(x, y))
            .collect();
        assert_eq!(r, expect);
    }

    #[test]
    fn depth_zero_and_absorbing_roots() {
        let g = quitting_simple();
        let s = StateId::name("s");
        assert_eq!(reachable(&g, &s, 0).unwrap(), BTreeSet::from([s.clone()]));
        let w = StateId::name("win");
        assert_eq!(reachable(&g, &w, 10).unwrap(), BTreeSet::from([w]));
        assert!(reachable(&g, &StateId::name("zz"), 3).is_err());
    }

    #[test]
    fn explored_set_layout() {
        let g = LehrerSorin::new(100);
        let e = ExploredSet::build(&g, &[StateId::pair(0, 0)], 2, 1000).unwrap();
        assert_eq!(e.states[0], StateId::pair(0, 0));
        assert_eq!(e.nodes[0], Node::Active);
        let i = e.index_of(&StateId::pair(2, 0)).unwrap();
        assert_eq!(e.nodes[i], Node::Frontier);
        let j = e.index_of(&StateId::pair(0, 1)).unwrap();
        assert_eq!(e.nodes[j], Node::Absorbing(-2.0));
        let (s, p) = e.successors(0, 1, 0);
        assert_eq!(s.len(), 2);
        assert_eq!(p, &[0.5, 0.5]);
        assert_eq!(e.frontier_count(), 2);
    }

    #[test]
    fn cap_enforced() {
        let g = LehrerSorin::new(1000);
        assert!(matches!(
            ExploredSet::build(&g, &[StateId::pair(0, 0)], 200, 50),
            Err(GameError::StateCap(50))
        ));
    }

    #[test]
    fn zero_probability_edges_are_not_followed() {
        let mut g = RecursiveGame::new("z");
        let s = StateId::name("s");
        g.add_absorbing(StateId::name("w"), rat(1, 1));
        g.add_absorbing(StateId::name("u"), rat(0, 1));
        g.add_active(s.clone(), &["a"], &["b"]);
        g.set_transition(
            &s,
            0,
            0,
            vec![
                (StateId::name("w"), rat(1, 1)),
                (StateId::name("u"), rat(0, 1)),
            ],
        );
        let r = reachable(&g, &s, 5).unwrap();
        assert!(!r.contains(&StateId::name("u")));
    }
}
