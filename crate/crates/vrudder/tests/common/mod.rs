//! Shared fixtures for the integration suites: the published flight
//! condition, geometry, mass, engine, and derivative tables, plus one
//! cached synthesis run on the published damaged plant.

#![allow(dead_code)]

use std::sync::OnceLock;

use vrudder::airframe::{
    golden_plant, DerivativeSet, FlightCondition, GeometryConfig, InertiaConfig,
};
use vrudder::engine::EngineParams;
use vrudder::lti::StateSpaceModel;
use vrudder::synthesis::{
    build_weights, ncf_synthesis, pilot_prefilter, shape_plant, LoopShapingWeights,
    SynthesisResult, DEFAULT_GAMMA_BACKOFF, DEFAULT_PREFILTER_GEARING,
};
use vrudder::thrustmap::MappingParams;

pub fn flight_condition() -> FlightCondition {
    FlightCondition::new(20_000.0, 0.001268, 673.0, 0.65).unwrap()
}

pub fn geometry() -> GeometryConfig {
    GeometryConfig { s: 5500.0, b: 196.0, cbar: 27.3, y_e: 69.83, tail: None }
}

pub fn inertia_nominal() -> InertiaConfig {
    InertiaConfig {
        weight: 6.3663e5,
        mass: 19_786.46,
        ixx: 18.2e6,
        iyy: 33.1e6,
        izz: 49.7e6,
        ixz: 0.97e6,
    }
}

pub fn inertia_damaged() -> InertiaConfig {
    InertiaConfig {
        weight: 6.2954e5,
        mass: 19_566.10,
        ixx: 17.893e6,
        iyy: 30.925e6,
        izz: 47.352e6,
        ixz: 0.3736e6,
    }
}

pub fn nominal_derivatives() -> DerivativeSet {
    DerivativeSet {
        cl_beta: -0.160,
        cl_p: -0.340,
        cl_r: 0.130,
        cl_da: 0.013,
        cl_dr: 0.008,
        cn_beta: 0.160,
        cn_p: -0.026,
        cn_r: -0.28,
        cn_da: 0.0018,
        cn_dr: -0.100,
        cy_beta: -0.90,
        cy_p: 0.0,
        cy_r: 0.0,
        cy_da: 0.0,
        cy_dr: 0.120,
        c_lift: 0.0,
    }
}

pub fn engine_params() -> EngineParams {
    EngineParams {
        tau: 1.25,
        zeta: 1.0,
        t_d: 0.4,
        t_max: 46_500.0,
        t_trim: 3221.0,
        rate_limit: 12_726.0,
        saturation: 43_729.0,
    }
}

pub fn mapping() -> MappingParams {
    let engine = engine_params();
    MappingParams {
        k_map: 443_299.2,
        saturation: engine.saturation,
        rate_limit: engine.rate_limit,
        engine,
    }
}

/// Everything the closed-loop suites need from one synthesis pass.
pub struct SynthRig {
    pub plant: StateSpaceModel,
    pub weights: LoopShapingWeights,
    pub result: SynthesisResult,
    pub prefilter: StateSpaceModel,
}

static RIG: OnceLock<SynthRig> = OnceLock::new();

/// Synthesize once per test binary and share the result.
pub fn rig() -> &'static SynthRig {
    RIG.get_or_init(|| {
        let plant = golden_plant();
        let weights = build_weights();
        let gs = shape_plant(&plant, &weights).unwrap();
        let result = ncf_synthesis(&gs, &weights, DEFAULT_GAMMA_BACKOFF).unwrap();
        let prefilter = pilot_prefilter(&weights, &DEFAULT_PREFILTER_GEARING).unwrap();
        SynthRig { plant, weights, result, prefilter }
    })
}
