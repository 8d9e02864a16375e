use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FieldSurveyor, SurveyError, SweepConfig, Tally, CSV_HEADER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SweepConfig,
    /// First `k` not yet processed.
    pub next_k: u64,
    /// Largest `d_label` already written, if any.
    pub last_d_label: Option<u64>,
    pub tally: Tally,
    /// CSV length covering exactly the processed blocks.
    pub csv_bytes: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Option<Self>, SurveyError> {
        match fs::read(path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes to a sibling temp file, then renames over `path`.
    pub fn save(&self, path: &Path) -> Result<(), SurveyError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&serde_json::to_vec_pretty(self)?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Complete(Tally),
    /// Stopped by `max_blocks`; rerun with the same checkpoint to continue.
    Interrupted {
        next_k: u64,
        tally: Tally,
    },
}

impl RunStatus {
    pub fn tally(&self) -> &Tally {
        match self {
            RunStatus::Complete(t) | RunStatus::Interrupted { tally: t, .. } => t,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, RunStatus::Complete(_))
    }
}

/// Block-wise sweep with optional CSV output and checkpointing.
pub struct SurveyRunner {
    pub config: SweepConfig,
    pub csv: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub max_blocks: Option<u64>,
}

impl SurveyRunner {
    pub fn new(config: SweepConfig) -> Self {
        Self {
            config,
            csv: None,
            checkpoint: None,
            max_blocks: None,
        }
    }

    fn open_csv(&self, resume_at: Option<u64>) -> Result<Option<csv::Writer<File>>, SurveyError> {
        let Some(path) = &self.csv else {
            return Ok(None);
        };
        let file = match resume_at {
            Some(len) => {
                let f = OpenOptions::new().append(true).open(path)?;
                f.set_len(len)?;
                f
            }
            None => File::create(path)?,
        };
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(file);
        if resume_at.is_none() {
            w.write_record(CSV_HEADER)?;
            w.flush()?;
        }
        Ok(Some(w))
    }

    pub fn run(&self) -> Result<RunStatus, SurveyError> {
        let c = &self.config;
        let saved = match &self.checkpoint {
            Some(p) => Checkpoint::load(p)?,
            None => None,
        };
        let mut state = match saved {
            Some(cp) => {
                if cp.config != *c {
                    return Err(SurveyError::CheckpointMismatch(format!(
                        "saved {:?}, requested {:?}",
                        cp.config, c
                    )));
                }
                cp
            }
            None => Checkpoint {
                config: *c,
                next_k: c.k_start,
                last_d_label: None,
                tally: Tally::default(),
                csv_bytes: 0,
            },
        };
        let resuming = state.csv_bytes > 0 || state.next_k > c.k_start;
        let mut csv = self.open_csv(resuming.then_some(state.csv_bytes))?;
        if let Some(w) = &csv {
            state.csv_bytes = w.get_ref().metadata()?.len();
        }
        if state.next_k > c.k_end {
            return Ok(RunStatus::Complete(state.tally));
        }

        let surveyor = FieldSurveyor::new(c.p, c.ell_bound, c.max_label())?;
        let mut blocks = 0u64;
        while state.next_k <= c.k_end {
            if self.max_blocks.is_some_and(|m| blocks >= m) {
                return Ok(RunStatus::Interrupted {
                    next_k: state.next_k,
                    tally: state.tally,
                });
            }
            let k0 = state.next_k;
            let k1 = k0.saturating_add(c.block_size.max(1) - 1).min(c.k_end);
            let recs = surveyor.block(c.family, k0, k1);
            for r in &recs {
                state.tally.add(r);
            }
            if let Some(w) = csv.as_mut() {
                for r in &recs {
                    w.write_record(r.csv_row())?;
                }
                w.flush()?;
                state.csv_bytes = w.get_ref().metadata()?.len();
            }
            if let Some(last) = recs.last() {
                state.last_d_label = Some(last.d_label);
            }
            state.next_k = k1 + 1;
            if let Some(p) = &self.checkpoint {
                state.save(p)?;
            }
            blocks += 1;
            log::debug!("block {k0}..={k1}: {} fields", recs.len());
        }
        Ok(RunStatus::Complete(state.tally))
    }
}
