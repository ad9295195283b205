//! Seeded Euler-Maruyama simulation of the `N`-particle system.

mod engine;
pub mod rng;
mod sampling;
mod sim;

pub use engine::{step_em, ParticleSystem, ParticleView};
pub use rng::NoiseStream;
pub use sampling::sample_initial;
pub use sim::{
    configured_threads, run_replica, simulate, with_pool, write_series_csv, ObservableSeries, ObservableSpec,
    ObservableValues, SimConfig,
};
