use rand::Rng;

use crate::error::Result;
use crate::model::ModelSpec;
use crate::nn::params::ParamStore;
use crate::seed::rng_from;
use crate::tensor::Tensor;

/// He-uniform weights (bound `√(6/fan_in)`) and zero biases for every
/// convolution and fully-connected layer, including the score head.
pub fn init_params(spec: &ModelSpec, seed: u64) -> Result<ParamStore> {
    let mut rng = rng_from(seed);
    let mut store = ParamStore::new();
    for (name, shape) in spec.param_shapes()? {
        let value = if name.ends_with(".weight") {
            let fan_in: usize = shape[1..].iter().product();
            let bound = (6.0 / fan_in as f64).sqrt();
            Tensor::from_fn(&shape, |_| rng.random_range(-bound..bound))
        } else {
            Tensor::zeros(&shape)
        };
        store.insert(name, value)?;
    }
    Ok(store)
}
