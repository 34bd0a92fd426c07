//! Ehrenfeucht–Fraïssé games on finite structures.
//!
//! The game is solved exactly by computing, for every injective move
//! sequence, its rank-`r` type: the atomic type of the sequence together
//! with the set of types of its one-element extensions. Duplicator wins the
//! `r`-round game from a position exactly when both sides have equal types.
//! Repeating an already chosen element never helps Spoiler, so only
//! sequences of distinct elements are explored.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::model::{ElementId, Structure};
use super::search::Indexed;
use super::StructureError;
use crate::limits::{GuardExceeded, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Spoiler,
    Duplicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub side: Side,
    pub element: ElementId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub spoiler: Move,
    /// Duplicator's answer on the other side; absent once she has no legal reply.
    pub reply: Option<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfOutcome {
    pub rounds: usize,
    pub winner: Player,
    /// Duplicator wins: a winning reply to every opening move of Spoiler.
    pub strategy: Vec<(Move, ElementId)>,
    /// Spoiler wins: a winning line, Duplicator answering with her first legal reply.
    pub spoiler_line: Vec<Round>,
}

#[derive(Hash, PartialEq, Eq)]
enum TypeKey {
    Atomic(Vec<u32>),
    Node(u32, Vec<u32>),
}

#[derive(Default)]
struct Interner {
    ids: HashMap<TypeKey, u32>,
}

impl Interner {
    fn intern(&mut self, key: TypeKey) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }
}

struct Board {
    ix: Indexed,
    /// Relation tuples grouped by their sorted set of (dense) elements.
    by_support: HashMap<Vec<usize>, Vec<(usize, Vec<usize>)>>,
}

impl Board {
    fn new(s: &Structure) -> Self {
        let ix = Indexed::new(s);
        let mut by_support: HashMap<Vec<usize>, Vec<(usize, Vec<usize>)>> = HashMap::new();
        for (r, rel) in ix.tuples.iter().enumerate() {
            for t in rel {
                let mut key = t.clone();
                key.sort_unstable();
                key.dedup();
                by_support.entry(key).or_default().push((r, t.clone()));
            }
        }
        Board { ix, by_support }
    }

    /// Appends to `enc` the atomic facts that involve the last element of `seq`.
    fn extend_atomic(&self, seq: &[usize], enc: &mut Vec<u32>) {
        let j = seq.len() - 1;
        let e = seq[j];
        enc.push(u32::MAX);
        enc.push(self.ix.sort[e] as u32);
        for (i, &p) in seq[..j].iter().enumerate() {
            if let (Some(a), Some(b)) = (self.ix.rank[p], self.ix.rank[e]) {
                if self.ix.sort[p] == self.ix.sort[e] {
                    enc.push(i as u32);
                    enc.push((a < b) as u32);
                }
            }
        }
        let mut facts: Vec<(usize, Vec<u32>)> = Vec::new();
        for mask in 0u64..(1u64 << j) {
            let mut key: Vec<usize> = (0..j).filter(|i| mask >> i & 1 == 1).map(|i| seq[i]).collect();
            key.push(e);
            key.sort_unstable();
            if let Some(list) = self.by_support.get(&key) {
                for (r, t) in list {
                    let positions = t
                        .iter()
                        .map(|x| seq.iter().position(|y| y == x).unwrap() as u32)
                        .collect();
                    facts.push((*r, positions));
                }
            }
        }
        facts.sort();
        for (r, pos) in facts {
            enc.push(u32::MAX - 1);
            enc.push(r as u32);
            enc.extend(pos);
        }
    }
}

struct Solver<'a> {
    boards: [&'a Board; 2],
    interner: Interner,
    visited: u64,
    limit: u64,
}

impl Solver<'_> {
    fn type_of(&mut self, side: usize, seq: &mut Vec<usize>, enc: &[u32], remaining: usize) -> Result<u32, GuardExceeded> {
        self.visited += 1;
        if self.visited > self.limit {
            return Err(GuardExceeded {
                what: "EF game positions",
                limit: self.limit,
            });
        }
        let atomic = self.interner.intern(TypeKey::Atomic(enc.to_vec()));
        if remaining == 0 {
            return Ok(atomic);
        }
        let board = self.boards[side];
        let mut children = Vec::new();
        for e in 0..board.ix.len() {
            if seq.contains(&e) {
                continue;
            }
            seq.push(e);
            let mut child_enc = enc.to_vec();
            board.extend_atomic(seq, &mut child_enc);
            let t = self.type_of(side, seq, &child_enc, remaining - 1)?;
            seq.pop();
            children.push(t);
        }
        children.sort_unstable();
        children.dedup();
        Ok(self.interner.intern(TypeKey::Node(atomic, children)))
    }

    fn encode(&self, side: usize, seq: &[usize]) -> Vec<u32> {
        let mut enc = Vec::new();
        for j in 1..=seq.len() {
            self.boards[side].extend_atomic(&seq[..j], &mut enc);
        }
        enc
    }

    fn type_at(&mut self, side: usize, seq: &[usize], remaining: usize) -> Result<u32, GuardExceeded> {
        let enc = self.encode(side, seq);
        let mut s = seq.to_vec();
        self.type_of(side, &mut s, &enc, remaining)
    }
}

/// Decides the `rounds`-round Ehrenfeucht–Fraïssé game between `a` and `b`.
pub fn ef_game(a: &Structure, b: &Structure, rounds: usize, limits: &Limits) -> Result<EfOutcome, StructureError> {
    if **a.signature() != **b.signature() {
        return Err(StructureError::SignatureMismatch);
    }
    let boards = [Board::new(a), Board::new(b)];
    let mut solver = Solver {
        boards: [&boards[0], &boards[1]],
        interner: Interner::default(),
        visited: 0,
        limit: limits.ef_positions,
    };
    let mut outcome = EfOutcome {
        rounds,
        winner: Player::Duplicator,
        strategy: Vec::new(),
        spoiler_line: Vec::new(),
    };
    if rounds == 0 {
        return Ok(outcome);
    }
    // Types of every opening move, computed once per side.
    let mut opening: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    for side in 0..2 {
        for e in 0..boards[side].ix.len() {
            let t = solver.type_at(side, &[e], rounds - 1)?;
            opening[side].push(t);
        }
    }
    let root = |ts: &Vec<u32>| {
        let mut set = ts.clone();
        set.sort_unstable();
        set.dedup();
        set
    };
    if root(&opening[0]) != root(&opening[1]) {
        outcome.winner = Player::Spoiler;
        outcome.spoiler_line = spoiler_line(&mut solver, &boards, rounds)?;
        return Ok(outcome);
    }
    for side in 0..2 {
        let other = 1 - side;
        for (e, t) in opening[side].iter().enumerate() {
            let reply = opening[other]
                .iter()
                .position(|u| u == t)
                .expect("equal types always admit a reply");
            outcome.strategy.push((
                Move {
                    side: side_of(side),
                    element: boards[side].ix.ids[e],
                },
                boards[other].ix.ids[reply],
            ));
        }
    }
    Ok(outcome)
}

fn side_of(i: usize) -> Side {
    if i == 0 {
        Side::Left
    } else {
        Side::Right
    }
}

fn spoiler_line(solver: &mut Solver<'_>, boards: &[Board; 2], rounds: usize) -> Result<Vec<Round>, GuardExceeded> {
    let mut seqs: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut line = Vec::new();
    for r in (0..rounds).rev() {
        // Spoiler looks for a move whose resulting type has no match on the other side.
        let mut chosen = None;
        'find: for side in 0..2 {
            let other = 1 - side;
            let mut answers = Vec::new();
            for f in 0..boards[other].ix.len() {
                if seqs[other].contains(&f) {
                    continue;
                }
                let mut s = seqs[other].clone();
                s.push(f);
                answers.push((f, solver.type_at(other, &s, r)?));
            }
            for e in 0..boards[side].ix.len() {
                if seqs[side].contains(&e) {
                    continue;
                }
                let mut s = seqs[side].clone();
                s.push(e);
                let t = solver.type_at(side, &s, r)?;
                if answers.iter().all(|(_, u)| *u != t) {
                    chosen = Some((side, e));
                    break 'find;
                }
            }
        }
        let Some((side, e)) = chosen else { break };
        let other = 1 - side;
        seqs[side].push(e);
        // Duplicator's first reply that keeps the position a partial isomorphism.
        let want = solver.encode(side, &seqs[side]);
        let mut reply = None;
        for f in 0..boards[other].ix.len() {
            if seqs[other].contains(&f) {
                continue;
            }
            let mut s = seqs[other].clone();
            s.push(f);
            if solver.encode(other, &s) == want {
                reply = Some(f);
                break;
            }
        }
        line.push(Round {
            spoiler: Move {
                side: side_of(side),
                element: boards[side].ix.ids[e],
            },
            reply: reply.map(|f| boards[other].ix.ids[f]),
        });
        match reply {
            Some(f) => seqs[other].push(f),
            None => break,
        }
    }
    Ok(line)
}
