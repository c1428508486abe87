use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainEpoch {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// One adaptation epoch; loss terms are means over the epoch's steps and
/// `None` when the term was not evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub total: f64,
    pub sim: Option<f64>,
    pub source: Option<f64>,
    pub target: Option<f64>,
    pub mi: Option<f64>,
    pub w3: f64,
    pub w4: f64,
    pub m: f64,
    pub source_accuracy: f64,
    pub monitor_cd: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,total,l_sim,l_source,l_target,l_mi,w3,w4,m,source_accuracy,monitor_cd\n");
        for e in &self.epochs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                e.epoch,
                e.total,
                opt(e.sim),
                opt(e.source),
                opt(e.target),
                opt(e.mi),
                e.w3,
                e.w4,
                e.m,
                e.source_accuracy,
                opt(e.monitor_cd)
            );
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn pretrain_csv(log: &[PretrainEpoch]) -> String {
    let mut s = String::from("epoch,loss,accuracy\n");
    for e in log {
        let _ = writeln!(s, "{},{},{}", e.epoch, e.loss, e.accuracy);
    }
    s
}
