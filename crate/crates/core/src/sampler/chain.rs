use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sweep, MoveCounters};
use crate::error::{invalid, Result};
use crate::hyper::Hyperparams;
use crate::model::{log_collapsed_posterior, log_likelihood};
use crate::network::Network;
use crate::positions::Positions;
use crate::scalar::Real;
use crate::state::ChainState;

/// How a chain is started.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum Init<T: Real> {
    /// `Z ~ N(0, 4 I)`, `beta` from its prior, `G = 1`.
    #[default]
    Prior,
    /// Start from the given state.
    State(Box<ChainState<T>>),
}

/// Length, thinning and seeding of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunConfig<T: Real> {
    /// Total number of sweeps, burn-in included.
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: Init<T>,
}

impl<T: Real> RunConfig<T> {
    pub fn new(iterations: usize, burnin: usize, thin: usize, seed: u64) -> Self {
        Self { iterations, burnin, thin, seed, init: Init::Prior }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.burnin > self.iterations {
            return Err(invalid(format!("burn-in {} exceeds {} iterations", self.burnin, self.iterations)));
        }
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        Ok(())
    }

    /// Whether sweep `t` (1-based) is retained.
    pub fn keeps(&self, t: usize) -> bool {
        t > self.burnin && (t - self.burnin) % self.thin == 0
    }
}

/// One retained draw. Allocations are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DrawRecord<T: Real> {
    /// 1-based sweep index within its chain.
    pub iter: usize,
    pub chain: usize,
    pub g: usize,
    pub beta: T,
    pub alloc: Vec<usize>,
    pub z: Positions<T>,
    pub loglik: T,
    pub logpost: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput<T: Real> {
    pub draws: Vec<DrawRecord<T>>,
    pub counters: MoveCounters,
    pub final_state: ChainState<T>,
}

/// Runs one chain from `ChaCha8Rng::seed_from_u64(cfg.seed)`.
///
/// With [`Init::Prior`] the stream first supplies the initial state, then
/// each sweep consumes draws in the order documented on the move functions.
/// Statistics are recomputed from scratch after every sweep.
pub fn run_chain<T: Real>(net: &Network, hp: &Hyperparams<T>, cfg: &RunConfig<T>) -> Result<ChainOutput<T>> {
    run_chain_indexed(net, hp, cfg, 0)
}

fn run_chain_indexed<T: Real>(
    net: &Network,
    hp: &Hyperparams<T>,
    cfg: &RunConfig<T>,
    chain: usize,
) -> Result<ChainOutput<T>> {
    hp.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = match &cfg.init {
        Init::Prior => ChainState::initial(net, hp, &mut rng),
        Init::State(s) => {
            if s.n() != net.n() || s.z.d() != hp.d || s.g > hp.g_max {
                return Err(invalid("initial state does not match the network or hyperparameters"));
            }
            let mut s = (**s).clone();
            s.refresh_stats();
            s
        }
    };
    let mut counters = MoveCounters::default();
    let mut draws = Vec::with_capacity((cfg.iterations - cfg.burnin) / cfg.thin);
    for t in 1..=cfg.iterations {
        sweep(&mut state, net, hp, &mut rng, &mut counters)?;
        state.refresh_stats();
        if cfg.keeps(t) {
            draws.push(DrawRecord {
                iter: t,
                chain,
                g: state.g,
                beta: state.beta,
                alloc: state.alloc.clone(),
                z: state.z.clone(),
                loglik: log_likelihood(net, &state.z, state.beta)?,
                logpost: log_collapsed_posterior(&state, net, hp)?,
            });
        }
    }
    Ok(ChainOutput { draws, counters, final_state: state })
}

/// Runs `chains` independent chains concurrently with seeds
/// `cfg.seed + c`; outputs are returned in chain order.
pub fn run_chains<T: Real>(
    net: &Network,
    hp: &Hyperparams<T>,
    cfg: &RunConfig<T>,
    chains: usize,
) -> Result<Vec<ChainOutput<T>>> {
    if chains == 0 {
        return Err(invalid("at least one chain is required"));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|c| {
                let mut cfg_c = cfg.clone();
                cfg_c.seed = cfg.seed.wrapping_add(c as u64);
                scope.spawn(move || run_chain_indexed(net, hp, &cfg_c, c))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    })
}
