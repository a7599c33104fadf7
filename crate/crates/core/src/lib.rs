pub mod acoustics;
pub mod agent;
pub mod baseline_control;
pub mod energy_stats;
pub mod environment;
pub mod qnet;
pub mod simulation;
pub mod turbine;
