//! Event-driven gossip of a payment and a conflicting attack transaction.
//!
//! Each node accepts the first of the two transactions it hears about and
//! ignores the other (first-seen mempool policy). On acceptance it relays to
//! every neighbor, each delivery delayed by an independent exponential
//! latency. The attacker's own node adopts the attack transaction at
//! injection time no matter what it already holds.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sample_exp, Rng};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxHold {
    Pay,
    Attack,
}

/// Ground truth for one propagation run. `NoAttack` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphLabel {
    /// Every node holds the payment transaction.
    NoAttack,
    AttackPresent,
}

impl GraphLabel {
    pub fn is_positive(self) -> bool {
        self == GraphLabel::NoAttack
    }

    /// Class index used by the classifier head: 1 for the positive class.
    pub fn class_index(self) -> usize {
        match self {
            GraphLabel::NoAttack => 1,
            GraphLabel::AttackPresent => 0,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 1 {
            GraphLabel::NoAttack
        } else {
            GraphLabel::AttackPresent
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    NoAttack,
    Attack { attack_origin: usize, attack_delay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub scenario: Scenario,
    pub pay_origin: usize,
    pub latency_mean: f64,
    pub seed: u64,
}

impl ScenarioParams {
    fn validate(&self, node_count: usize) -> Result<()> {
        if !(self.latency_mean > 0.0 && self.latency_mean.is_finite()) {
            return Err(Error::params("latency_mean must be positive and finite"));
        }
        if self.pay_origin >= node_count {
            return Err(Error::params("pay_origin out of range"));
        }
        if let Scenario::Attack {
            attack_origin,
            attack_delay,
        } = self.scenario
        {
            if attack_origin >= node_count {
                return Err(Error::params("attack_origin out of range"));
            }
            if attack_origin == self.pay_origin {
                return Err(Error::params("attack_origin equals pay_origin"));
            }
            if !(attack_delay >= 0.0 && attack_delay.is_finite()) {
                return Err(Error::params("attack_delay must be non-negative and finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOutcome {
    pub holds: Vec<TxHold>,
    pub graph_label: GraphLabel,
    pub pay_holder_count: usize,
    /// Time of the last processed event.
    pub quiescence_time: f64,
}

pub fn graph_label_of(pay_holder_count: usize, node_count: usize) -> GraphLabel {
    if pay_holder_count == node_count {
        GraphLabel::NoAttack
    } else {
        GraphLabel::AttackPresent
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    node: u32,
    tx: TxHold,
    /// Attacker injection: adopt even if the node already holds something.
    forced: bool,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap and we want earliest (time, seq) first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    fn push(&mut self, time: f64, node: u32, tx: TxHold, forced: bool) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event {
            time,
            seq,
            node,
            tx,
            forced,
        });
    }
}

/// Runs one gossip simulation to quiescence.
pub fn run_propagation(t: &Topology, p: &ScenarioParams) -> Result<PropagationOutcome> {
    let n = t.node_count();
    p.validate(n)?;
    if !t.is_connected() {
        return Err(Error::input("topology is disconnected"));
    }
    let mut rng = rng_from_seed(p.seed);
    let mut held: Vec<Option<TxHold>> = vec![None; n];
    let mut queue = EventQueue {
        heap: BinaryHeap::with_capacity(n),
        next_seq: 0,
    };
    queue.push(0.0, p.pay_origin as u32, TxHold::Pay, false);
    if let Scenario::Attack {
        attack_origin,
        attack_delay,
    } = p.scenario
    {
        queue.push(attack_delay, attack_origin as u32, TxHold::Attack, true);
    }

    let mut now = 0.0;
    while let Some(ev) = queue.heap.pop() {
        now = ev.time;
        let v = ev.node as usize;
        let accept = match held[v] {
            None => true,
            Some(current) => ev.forced && current != ev.tx,
        };
        if !accept {
            continue;
        }
        held[v] = Some(ev.tx);
        for &u in t.neighbors(v) {
            let delay = sample_exp(&mut rng, p.latency_mean);
            queue.push(now + delay, u, ev.tx, false);
        }
    }

    let holds: Vec<TxHold> = held
        .into_iter()
        .map(|h| h.ok_or_else(|| Error::input("node left without a transaction")))
        .collect::<Result<_>>()?;
    let pay_holder_count = holds.iter().filter(|&&h| h == TxHold::Pay).count();
    Ok(PropagationOutcome {
        graph_label: graph_label_of(pay_holder_count, n),
        holds,
        pay_holder_count,
        quiescence_time: now,
    })
}

/// Draws per-sample scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSampler {
    pub latency_mean: f64,
    /// Attack delays are uniform on `[0, delay_factor * latency_mean * ceil(L)]`
    /// where `L` is the estimated mean shortest-path length. The default 0 is a
    /// race: both transactions leave their origins at the same instant. Any
    /// head start of even a fraction of one hop lets the hub-driven pay flood
    /// swallow the network before the attack leaves its origin.
    pub delay_factor: f64,
    /// BFS sources used for the path-length estimate.
    pub path_length_sources: usize,
}

impl Default for ScenarioSampler {
    fn default() -> Self {
        ScenarioSampler {
            latency_mean: 1.0,
            delay_factor: 0.0,
            path_length_sources: 16,
        }
    }
}

impl ScenarioSampler {
    pub fn max_attack_delay(&self, t: &Topology, rng: &mut Rng) -> f64 {
        if self.delay_factor == 0.0 {
            return 0.0;
        }
        let aspl = t.mean_shortest_path_estimate(self.path_length_sources, rng);
        self.delay_factor * self.latency_mean * libm::ceil(aspl)
    }

    /// Origins are uniform over nodes with `attack_origin != pay_origin`.
    pub fn sample(&self, t: &Topology, attack: bool, rng: &mut Rng, sim_seed: u64) -> Result<ScenarioParams> {
        let n = t.node_count();
        if n == 0 || (attack && n < 2) {
            return Err(Error::params("graph too small for scenario"));
        }
        let pay_origin = rng.random_range(0..n);
        let scenario = if attack {
            let mut attack_origin = rng.random_range(0..n);
            while attack_origin == pay_origin {
                attack_origin = rng.random_range(0..n);
            }
            let max_delay = self.max_attack_delay(t, rng);
            Scenario::Attack {
                attack_origin,
                attack_delay: rng.random::<f64>() * max_delay,
            }
        } else {
            Scenario::NoAttack
        };
        Ok(ScenarioParams {
            scenario,
            pay_origin,
            latency_mean: self.latency_mean,
            seed: sim_seed,
        })
    }
}
