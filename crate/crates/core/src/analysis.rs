//! End-to-end analytic pipeline for the renovation queue.

use crate::chain::EmbeddedChain;
use crate::error::Result;
use crate::loss::{
    gamma_coefficients, loss_option1, loss_option2, risks_option1, risks_option2, GammaTable,
    LossBreakdown, RenovationRisk1, WaitingRisk,
};
use crate::model::{validate, ModelParams, PoissonKernel, Resolution};
use crate::stationary::StationaryProfile;

#[derive(Debug, Clone)]
pub enum Risks {
    KeepLast(RenovationRisk1),
    Cancel { gamma: GammaTable, risk: WaitingRisk },
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub params: ModelParams,
    pub kernel: PoissonKernel,
    pub chain: EmbeddedChain,
    pub profile: StationaryProfile,
    pub risks: Risks,
    pub loss: LossBreakdown,
}

impl Analysis {
    pub fn mean_queue(&self) -> f64 {
        self.profile.moment(1)
    }

    /// `E N^1..E N^m`.
    pub fn moments(&self, m: u32) -> Vec<f64> {
        (1..=m).map(|k| self.profile.moment(k)).collect()
    }
}

pub fn analyze(params: &ModelParams) -> Result<Analysis> {
    let params = validate(params.clone())?;
    let kernel = params.kernel();
    let chain = EmbeddedChain::solve(&params, &kernel)?;
    let profile = StationaryProfile::compute(&params, &kernel, &chain)?;
    let (risks, loss) = match params.option {
        Resolution::KeepLast => {
            let r = risks_option1(&params, &kernel);
            let loss = loss_option1(&profile, &r, &params, &kernel);
            (Risks::KeepLast(r), loss)
        }
        Resolution::Cancel => {
            let gamma = gamma_coefficients(&profile, &params, &kernel);
            let risk = risks_option2(&params, &kernel);
            let loss = loss_option2(&profile, &gamma, &risk, &params);
            (Risks::Cancel { gamma, risk }, loss)
        }
    };
    Ok(Analysis {
        params,
        kernel,
        chain,
        profile,
        risks,
        loss,
    })
}
