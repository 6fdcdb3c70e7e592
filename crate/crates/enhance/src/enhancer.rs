//! The enhancement seam: anything that turns an assembled input into an
//! enhanced color image plugs in here.

use g2r_core::{EnhancerInput, ImagePlane};

use crate::error::EnhanceError;

pub trait Enhancer: Send {
    /// Stable human-readable identifier for logs and stats.
    fn name(&self) -> &str;

    /// Produce the enhanced color image for one input. Runs on the hot
    /// path; implementations own whatever state they need to mutate.
    fn enhance(&mut self, input: &EnhancerInput) -> Result<ImagePlane, EnhanceError>;
}

/// Pass-through: the enhanced image is the sensor image. Useful as a
/// pipeline baseline and for latency measurements of everything else.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityEnhancer;

impl Enhancer for IdentityEnhancer {
    fn name(&self) -> &str {
        "identity"
    }

    fn enhance(&mut self, input: &EnhancerInput) -> Result<ImagePlane, EnhanceError> {
        if input.rgb.channels() != 3 {
            return Err(EnhanceError::WrongChannelCount {
                expected: 3,
                got: input.rgb.channels(),
            });
        }
        Ok(input.rgb.clone())
    }
}
