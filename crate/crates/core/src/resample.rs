use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Output of a resampler plus any non-fatal conditions it hit.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub dataset: LabeledDataset,
    pub warnings: Vec<String>,
}

impl From<LabeledDataset> for Resampled {
    fn from(dataset: LabeledDataset) -> Self {
        Self {
            dataset,
            warnings: Vec::new(),
        }
    }
}

// Guards against products like 0.7 * 10 = 7.000000000000001 rounding up.
const CEIL_SLACK: f64 = 1e-9;

/// Minority count after oversampling: `ceil(ratio × n_maj)`.
pub(crate) fn oversample_target(ratio: f64, n_maj: usize, n_min: usize) -> Result<usize> {
    check_ratio(ratio)?;
    let target = (ratio * n_maj as f64 - CEIL_SLACK).ceil().max(0.0) as usize;
    if target < n_min {
        return Err(Error::InvalidParameter(format!(
            "target ratio {ratio} is below the current minority/majority ratio {:.6}",
            n_min as f64 / n_maj as f64
        )));
    }
    Ok(target)
}

/// Majority count after undersampling: `ceil(n_min / ratio)`.
pub(crate) fn undersample_target(ratio: f64, n_min: usize) -> Result<usize> {
    check_ratio(ratio)?;
    Ok((n_min as f64 / ratio - CEIL_SLACK).ceil().max(0.0) as usize)
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "target ratio {ratio} outside (0, 1]"
        )))
    }
}
