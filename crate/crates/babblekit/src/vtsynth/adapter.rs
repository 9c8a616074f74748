//! External synthesizer adapter: line-delimited JSON over a child process's
//! standard streams. This is the seam for substituting a different forward
//! model without touching the rest of the pipeline.
//!
//! Request (one line):
//! `{"targets": [[..]], "durations": [..], "tau_supra": t, "tau_glottal": t,
//!   "glottal": {"chink_area": a, "relative_amplitude": r}, "sample_rate": f}`
//!
//! Response (one line): `{"wav_path": p, "tube_min_area": a, "lip_area": a}`
//! or `{"error": msg}`.

use crate::error::{Error, Result};
use crate::tam::{GlottalFree, UtteranceSpec};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

#[derive(Debug, Serialize)]
struct SynthRequest<'a> {
    targets: Vec<&'a [f64]>,
    durations: Vec<f64>,
    tau_supra: f64,
    tau_glottal: f64,
    glottal: GlottalFree,
    sample_rate: f64,
}

/// Successful adapter response.
#[derive(Debug, Clone, Deserialize)]
pub struct ExternalResult {
    pub wav_path: String,
    pub tube_min_area: f64,
    pub lip_area: f64,
}

#[derive(Debug, Deserialize)]
struct RawResponse {
    #[serde(default)]
    wav_path: Option<String>,
    #[serde(default)]
    tube_min_area: Option<f64>,
    #[serde(default)]
    lip_area: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

/// A running external synthesizer child process.
pub struct ExternalSynth {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalSynth {
    /// Spawns `cmd` with `args`; the child must answer one response line per
    /// request line.
    pub fn spawn(cmd: &str, args: &[String]) -> Result<ExternalSynth> {
        let mut child = Command::new(cmd)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::External(format!("failed to spawn `{cmd}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalSynth {
            child,
            stdin,
            stdout,
        })
    }

    /// Sends one utterance and waits for the response line.
    pub fn synthesize(&mut self, spec: &UtteranceSpec, sample_rate: f64) -> Result<ExternalResult> {
        let req = SynthRequest {
            targets: spec.segments.iter().map(|s| s.target.values.as_slice()).collect(),
            durations: spec.segments.iter().map(|s| s.duration).collect(),
            tau_supra: spec.tau_supra,
            tau_glottal: spec.tau_glottal,
            glottal: spec.glottal,
            sample_rate,
        };
        let mut line = serde_json::to_string(&req)?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::External(format!("request write failed: {e}")))?;

        let mut resp = String::new();
        let n = self
            .stdout
            .read_line(&mut resp)
            .map_err(|e| Error::External(format!("response read failed: {e}")))?;
        if n == 0 {
            return Err(Error::External("synthesizer closed its stdout".into()));
        }
        let raw: RawResponse = serde_json::from_str(resp.trim())
            .map_err(|e| Error::External(format!("bad response `{}`: {e}", resp.trim())))?;
        if let Some(msg) = raw.error {
            return Err(Error::External(msg));
        }
        match (raw.wav_path, raw.tube_min_area, raw.lip_area) {
            (Some(wav_path), Some(tube_min_area), Some(lip_area)) => Ok(ExternalResult {
                wav_path,
                tube_min_area,
                lip_area,
            }),
            _ => Err(Error::External("response missing required fields".into())),
        }
    }
}

impl Drop for ExternalSynth {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
