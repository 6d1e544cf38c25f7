//! Distributed circuit execution.
//!
//! Every rank runs the same gate loop on its own slice and its own
//! [`Package`]. Gates on local positions are a plain multiply; gates that
//! touch the global area use the block decomposition
//! `v'_r = Σ_c W_rc · v_c` with the slices exchanged by a ring or broadcast
//! schedule. Swap planning is replicated, so every rank holds the same
//! layout at every gate.

use std::collections::BTreeMap;

use futures::executor::block_on;
use futures::future::join_all;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{gate_dd, Circuit, Gate};
use crate::dd::{Package, VecEdge};
use crate::error::{EngineError, NumericError, TransportError};
use crate::numerics::{Complex, ZERO};
use crate::partition::{Locality, PartitionPlan};
use crate::swap::{lookahead_globals, plan_swaps_v1, plan_swaps_v2, QubitLayout};
use crate::transport::{channel_endpoints, socket_endpoints, wire, CommMetrics, Endpoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comm {
    Ring,
    #[serde(rename = "bcast")]
    Broadcast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapMode {
    None,
    V1,
    V2,
}

/// How rank workers are driven.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// One OS thread per rank.
    Threaded,
    /// All ranks interleaved on the calling thread.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Inproc,
    Socket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub plan: PartitionPlan,
    pub comm: Comm,
    pub swap: SwapMode,
    pub seed: u64,
    /// Node count above which a rank reclaims unreachable nodes.
    pub reclaim_watermark: usize,
    pub skip_zero_blocks: bool,
    /// Swap every qubit back to its own position after the last gate.
    pub restore_layout: bool,
    pub scheduler: Scheduler,
    pub transport: TransportKind,
}

impl RunConfig {
    pub fn new(plan: PartitionPlan) -> Self {
        Self {
            plan,
            comm: Comm::Ring,
            swap: SwapMode::None,
            seed: 0,
            reclaim_watermark: 1 << 20,
            skip_zero_blocks: true,
            restore_layout: false,
            scheduler: Scheduler::Threaded,
            transport: TransportKind::Inproc,
        }
    }

    pub fn comm(mut self, comm: Comm) -> Self {
        self.comm = comm;
        self
    }

    pub fn swap(mut self, swap: SwapMode) -> Self {
        self.swap = swap;
        self
    }

    pub fn scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }
}

/// One rank's slice and tables.
pub struct RankState {
    pub rank: usize,
    pub pkg: Package,
    /// Slice over the local positions; the zero edge if the slice is empty.
    pub state: VecEdge,
    pub layout: QubitLayout,
    pub metrics: CommMetrics,
}

impl RankState {
    /// Rank `rank` of the initial `|0…0⟩` partition.
    pub fn initial(rank: usize, plan: &PartitionPlan) -> Self {
        let mut pkg = Package::new();
        let state = if rank == 0 {
            pkg.basis_state(plan.n_local(), 0)
        } else {
            VecEdge::zero()
        };
        Self {
            rank,
            pkg,
            state,
            layout: QubitLayout::identity(plan.n_qubits()),
            metrics: CommMetrics::default(),
        }
    }

    fn note_size(&mut self, watermark: usize) {
        let nodes = self.pkg.node_count();
        self.metrics.peak_nodes = self.metrics.peak_nodes.max(nodes as u64);
        if nodes > watermark {
            self.pkg.reclaim(&[self.state], &[]);
        }
    }
}

/// Applies a gate on local physical positions to the rank's slice.
pub fn apply_local(rs: &mut RankState, plan: &PartitionPlan, gate: &Gate) -> Result<(), EngineError> {
    debug_assert_eq!(plan.classify_physical(gate), Locality::Local);
    let m = gate_dd(&mut rs.pkg, gate, plan.n_local());
    rs.state = rs.pkg.multiply(m, rs.state)?;
    rs.metrics.local_applications += 1;
    Ok(())
}

/// Ring schedule: each slice travels once around the ring while every rank
/// accumulates its block products. Returns the block columns this rank
/// consumed, in order.
pub async fn apply_global_ring(
    rs: &mut RankState,
    ep: &mut Endpoint,
    plan: &PartitionPlan,
    gate: &Gate,
    skip_zero_blocks: bool,
) -> Result<Vec<usize>, EngineError> {
    let p = plan.ranks();
    let r = rs.rank;
    let m = gate_dd(&mut rs.pkg, gate, plan.n_qubits());
    let own = plan.extract_block(&mut rs.pkg, m, r, r)?;
    let mut acc = rs.pkg.multiply(own, rs.state)?;
    let mut consumed = vec![r];
    let mut buf = wire::encode(&rs.pkg, rs.state).map_err(TransportError::from)?;
    for t in 1..p {
        buf = ep.ring_shift(buf).await?;
        let c = (r + p - t) % p;
        let block = plan.extract_block(&mut rs.pkg, m, r, c)?;
        consumed.push(c);
        if skip_zero_blocks && block.is_zero() {
            continue;
        }
        let v = wire::decode(&mut rs.pkg, &buf).map_err(TransportError::from)?;
        let prod = rs.pkg.multiply(block, v)?;
        acc = rs.pkg.add_vec(acc, prod)?;
    }
    rs.state = acc;
    rs.metrics.global_applications += 1;
    Ok(consumed)
}

/// Broadcast schedule: rank `k = 0, 1, …` in turn sends its slice to all
/// others. Returns the block columns consumed, in order.
pub async fn apply_global_broadcast(
    rs: &mut RankState,
    ep: &mut Endpoint,
    plan: &PartitionPlan,
    gate: &Gate,
    skip_zero_blocks: bool,
) -> Result<Vec<usize>, EngineError> {
    let r = rs.rank;
    let m = gate_dd(&mut rs.pkg, gate, plan.n_qubits());
    let mut acc = VecEdge::zero();
    let mut consumed = Vec::with_capacity(plan.ranks());
    for k in 0..plan.ranks() {
        let payload = if k == r {
            Some(wire::encode(&rs.pkg, rs.state).map_err(TransportError::from)?)
        } else {
            None
        };
        let bytes = ep.broadcast_from(k, payload).await?;
        let block = plan.extract_block(&mut rs.pkg, m, r, k)?;
        consumed.push(k);
        if skip_zero_blocks && block.is_zero() {
            continue;
        }
        let v = if k == r {
            rs.state
        } else {
            wire::decode(&mut rs.pkg, &bytes).map_err(TransportError::from)?
        };
        let prod = rs.pkg.multiply(block, v)?;
        acc = rs.pkg.add_vec(acc, prod)?;
    }
    rs.state = acc;
    rs.metrics.global_applications += 1;
    Ok(consumed)
}

async fn apply_physical(
    rs: &mut RankState,
    ep: &mut Endpoint,
    cfg: &RunConfig,
    gate: &Gate,
) -> Result<(), EngineError> {
    let plan = &cfg.plan;
    match plan.classify_physical(gate) {
        Locality::Local => apply_local(rs, plan, gate)?,
        Locality::Global => {
            match cfg.comm {
                Comm::Ring => apply_global_ring(rs, ep, plan, gate, cfg.skip_zero_blocks).await?,
                Comm::Broadcast => apply_global_broadcast(rs, ep, plan, gate, cfg.skip_zero_blocks).await?,
            };
        }
    }
    rs.note_size(cfg.reclaim_watermark);
    Ok(())
}

async fn insert_swap(
    rs: &mut RankState,
    ep: &mut Endpoint,
    cfg: &RunConfig,
    a: usize,
    b: usize,
) -> Result<(), EngineError> {
    apply_physical(rs, ep, cfg, &Gate::swap(a, b)).await?;
    rs.layout.swap_positions(a, b);
    rs.metrics.swaps_inserted += 1;
    Ok(())
}

async fn run_rank(circuit: &Circuit, cfg: &RunConfig, mut ep: Endpoint) -> Result<RankState, EngineError> {
    let plan = &cfg.plan;
    let mut rs = RankState::initial(ep.rank(), plan);
    for (i, gate) in circuit.gates().iter().enumerate() {
        if cfg.swap != SwapMode::None && plan.classify_gate(gate, &rs.layout) == Locality::Global {
            let next_global = lookahead_globals(circuit, i, plan, &rs.layout);
            let swaps = match cfg.swap {
                SwapMode::V1 => plan_swaps_v1(&rs.layout, &next_global),
                _ => plan_swaps_v2(&rs.layout, &next_global, plan),
            }
            .swaps;
            for (a, b) in swaps {
                insert_swap(&mut rs, &mut ep, cfg, a, b).await?;
            }
        }
        let physical = rs.layout.remap_gate(gate);
        apply_physical(&mut rs, &mut ep, cfg, &physical).await?;
    }
    if cfg.restore_layout {
        for p in 0..plan.n_qubits() {
            if rs.layout.logical(p) != p {
                let from = rs.layout.physical(p);
                insert_swap(&mut rs, &mut ep, cfg, p, from).await?;
            }
        }
    }
    rs.metrics.messages_sent = ep.metrics.messages_sent;
    rs.metrics.bytes_sent = ep.metrics.bytes_sent;
    rs.metrics.rounds = ep.metrics.rounds;
    rs.metrics.max_sends_in_round = ep.metrics.max_sends_in_round;
    Ok(rs)
}

/// Final per-rank slices of a run plus the layout they are stored under.
pub struct RunOutcome {
    pub plan: PartitionPlan,
    pub ranks: Vec<RankState>,
}

/// Executes `circuit` from `|0…0⟩` under `cfg`.
pub fn run_circuit(circuit: &Circuit, cfg: &RunConfig) -> Result<RunOutcome, EngineError> {
    if circuit.n_qubits() != cfg.plan.n_qubits() {
        return Err(EngineError::Width {
            circuit: circuit.n_qubits(),
            plan: cfg.plan.n_qubits(),
        });
    }
    let endpoints = match cfg.transport {
        TransportKind::Inproc => channel_endpoints(cfg.plan.ranks()),
        TransportKind::Socket if cfg.scheduler == Scheduler::Sequential => {
            return Err(EngineError::Config(
                "the socket transport needs the threaded scheduler".into(),
            ))
        }
        TransportKind::Socket => socket_endpoints(cfg.plan.ranks())?,
    };
    let results: Vec<Result<RankState, EngineError>> = match cfg.scheduler {
        Scheduler::Sequential => block_on(join_all(endpoints.into_iter().map(|ep| run_rank(circuit, cfg, ep)))),
        Scheduler::Threaded => std::thread::scope(|s| {
            let handles: Vec<_> = endpoints
                .into_iter()
                .map(|ep| s.spawn(move || block_on(run_rank(circuit, cfg, ep))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or(Err(EngineError::WorkerPanic)))
                .collect()
        }),
    };
    let mut ranks = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(s) => ranks.push(s),
            // a rank that failed first makes its peers see a disconnect
            Err(EngineError::Transport(TransportError::Disconnected { .. })) if first_err.is_some() => {}
            Err(e) => {
                if first_err.is_none()
                    || matches!(
                        first_err,
                        Some(EngineError::Transport(TransportError::Disconnected { .. }))
                    )
                {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(RunOutcome { plan: cfg.plan, ranks })
}

impl RunOutcome {
    /// Layout the slices are stored under (identical on every rank).
    pub fn layout(&self) -> &QubitLayout {
        &self.ranks[0].layout
    }

    pub fn metrics(&self) -> Vec<CommMetrics> {
        self.ranks.iter().map(|r| r.metrics.clone()).collect()
    }

    /// Cluster-wide totals: message and byte counts summed, the rest taken
    /// as the maximum over ranks.
    pub fn total_metrics(&self) -> CommMetrics {
        let mut t = CommMetrics::default();
        for m in self.ranks.iter().map(|r| &r.metrics) {
            t.messages_sent += m.messages_sent;
            t.bytes_sent += m.bytes_sent;
            t.rounds = t.rounds.max(m.rounds);
            t.max_sends_in_round = t.max_sends_in_round.max(m.max_sends_in_round);
            t.global_applications = t.global_applications.max(m.global_applications);
            t.local_applications = t.local_applications.max(m.local_applications);
            t.swaps_inserted = t.swaps_inserted.max(m.swaps_inserted);
            t.peak_nodes = t.peak_nodes.max(m.peak_nodes);
        }
        t
    }

    /// Amplitude of a logical basis state (qubit `q` is bit `q`).
    pub fn amplitude(&self, logical_index: u64) -> Complex {
        let physical = self.layout().to_physical_index(logical_index);
        let n_local = self.plan.n_local();
        let rank = (physical >> n_local) as usize;
        let local = physical & ((1u64 << n_local) - 1);
        let rs = &self.ranks[rank];
        rs.pkg.amplitude_at(rs.state, n_local, local).unwrap_or(ZERO)
    }

    /// Amplitude of a logical bitstring, most significant qubit first.
    pub fn amplitude_bits(&self, bits: &[bool]) -> Result<Complex, EngineError> {
        if bits.len() != self.plan.n_qubits() {
            return Err(EngineError::Config(format!(
                "index has {} bits, state has {} qubits",
                bits.len(),
                self.plan.n_qubits()
            )));
        }
        Ok(self.amplitude(bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)))
    }

    pub fn squared_norm(&self) -> f64 {
        self.ranks.iter().map(|r| r.pkg.squared_norm(r.state)).sum()
    }

    /// Dense state indexed by logical basis index.
    ///
    /// # Panics
    /// Above 26 qubits.
    pub fn to_dense_logical(&self) -> Vec<Complex> {
        let n = self.plan.n_qubits();
        assert!(n <= 26, "refusing to expand {n} qubits densely");
        let n_local = self.plan.n_local();
        let layout = self.layout();
        let mut out = vec![ZERO; 1 << n];
        for rs in &self.ranks {
            let slice = rs.pkg.to_dense_vec(rs.state, n_local);
            let base = (rs.rank as u64) << n_local;
            for (i, a) in slice.into_iter().enumerate() {
                if a != ZERO {
                    out[layout.to_logical_index(base | i as u64) as usize] = a;
                }
            }
        }
        out
    }

    /// Draws `shots` logical basis states by descending each slice with
    /// probabilities proportional to the squared norms below each edge.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<BTreeMap<u64, u64>, NumericError> {
        let norms: Vec<f64> = self.ranks.iter().map(|r| r.pkg.squared_norm(r.state)).collect();
        let total: f64 = norms.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(NumericError::Unnormalized(total));
        }
        let node_norms: Vec<_> = self.ranks.iter().map(|r| r.pkg.node_norms(r.state)).collect();
        let n_local = self.plan.n_local();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hist = BTreeMap::new();
        for _ in 0..shots {
            let mut u = rng.gen::<f64>() * total;
            let mut rank = norms.len() - 1;
            for (r, &w) in norms.iter().enumerate() {
                if u < w {
                    rank = r;
                    break;
                }
                u -= w;
            }
            while norms[rank] == 0.0 {
                rank -= 1;
            }
            let rs = &self.ranks[rank];
            let memo = &node_norms[rank];
            let weight_of = |e: VecEdge| {
                if e.is_zero() {
                    0.0
                } else if e.node.is_terminal() {
                    e.weight.norm_sqr()
                } else {
                    e.weight.norm_sqr() * memo[&e.node]
                }
            };
            let mut e = rs.state;
            let mut local = 0u64;
            for level in (0..n_local).rev() {
                let c0 = rs.pkg.child(e, 0);
                let c1 = rs.pkg.child(e, 1);
                let (p0, p1) = (weight_of(c0), weight_of(c1));
                let one = rng.gen::<f64>() * (p0 + p1) >= p0;
                e = if one { c1 } else { c0 };
                local |= (one as u64) << level;
            }
            let physical = (rank as u64) << n_local | local;
            *hist.entry(self.layout().to_logical_index(physical)).or_insert(0) += 1;
        }
        Ok(hist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::channel_endpoints;

    #[test]
    fn ring_consumes_columns_backwards() {
        let plan = PartitionPlan::new(4, 4).unwrap();
        let gate = &Gate::h(3);
        let eps = channel_endpoints(4);
        let out = block_on(join_all(eps.into_iter().map(|mut ep| async move {
            let mut rs = RankState::initial(ep.rank(), &plan);
            apply_global_ring(&mut rs, &mut ep, &plan, gate, false).await.unwrap()
        })));
        for (r, cols) in out.into_iter().enumerate() {
            assert_eq!(cols, (0..4).map(|t| (r + 4 - t) % 4).collect::<Vec<_>>());
        }
    }

    #[test]
    fn local_h_touches_rank_zero_only() {
        let plan = PartitionPlan::new(3, 4).unwrap();
        let c = Circuit::from_gates(3, vec![Gate::h(0)]).unwrap();
        let out = run_circuit(&c, &RunConfig::new(plan)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(0) - Complex::new(h, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(1) - Complex::new(h, 0.0)).norm() < 1e-15);
        assert!(out.ranks[1..].iter().all(|r| r.state.is_zero()));
        assert_eq!(out.total_metrics().messages_sent, 0);
    }

    #[test]
    fn empty_circuit() {
        let plan = PartitionPlan::new(3, 2).unwrap();
        let out = run_circuit(&Circuit::new(3), &RunConfig::new(plan)).unwrap();
        assert_eq!(out.amplitude(0), crate::ONE);
        assert_eq!(out.total_metrics(), CommMetrics::default());
    }

    #[test]
    fn width_and_config_errors() {
        let plan = PartitionPlan::new(3, 2).unwrap();
        assert!(matches!(
            run_circuit(&Circuit::new(2), &RunConfig::new(plan)),
            Err(EngineError::Width { .. })
        ));
        let mut cfg = RunConfig::new(plan).scheduler(Scheduler::Sequential);
        cfg.transport = TransportKind::Socket;
        assert!(matches!(
            run_circuit(&Circuit::new(3), &cfg),
            Err(EngineError::Config(_))
        ));
    }

    #[test]
    fn sampling_basis_state() {
        let plan = PartitionPlan::new(3, 2).unwrap();
        let c = Circuit::from_gates(3, vec![Gate::x(0), Gate::x(2)]).unwrap();
        let out = run_circuit(&c, &RunConfig::new(plan)).unwrap();
        let hist = out.sample(100, 1).unwrap();
        assert_eq!(hist.into_iter().collect::<Vec<_>>(), vec![(0b101, 100)]);
    }
}
