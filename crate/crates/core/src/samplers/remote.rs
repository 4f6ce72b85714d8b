//! Blocking submit/poll client for a hosted annealing service.
//!
//! Protocol:
//!
//! * `POST {endpoint}/problems?num_reads=N[&chain_strength=C]` with the QUBO
//!   export text as body; the response body is the problem id.
//! * `GET {endpoint}/problems/{id}` answers a status line (`PENDING`,
//!   `RUNNING`, `COMPLETED` or `FAILED <reason>`). A completed problem is
//!   followed by one `bitstring energy occurrences` line per sample, where
//!   character `i` of the bitstring is `x_i`.
//!
//! A bearer token is sent when configured. Returned energies are never
//! trusted: each one is recomputed locally and any disagreement rejects the
//! whole response.

use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::qubo::Qubo;

use super::{SampleSet, SampleSetInfo, Sampler, SamplerError};

pub const ENDPOINT_ENV: &str = "ANNEAL_ENDPOINT";
pub const TOKEN_ENV: &str = "ANNEAL_TOKEN";
pub const TIMEOUT_ENV: &str = "ANNEAL_TIMEOUT_SECS";

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub token: Option<String>,
    pub timeout: Duration,
    pub poll_interval: Duration,
    pub num_reads: usize,
    /// Passed through untouched.
    pub chain_strength: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemoteFile {
    endpoint: String,
    token: Option<String>,
    timeout_secs: Option<u64>,
    poll_interval_ms: Option<u64>,
    num_reads: Option<usize>,
    chain_strength: Option<f64>,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            token: None,
            timeout: Duration::from_secs(60),
            poll_interval: Duration::from_millis(250),
            num_reads: 1000,
            chain_strength: None,
        }
    }

    /// Reads `ANNEAL_ENDPOINT`, `ANNEAL_TOKEN` and `ANNEAL_TIMEOUT_SECS`.
    pub fn from_env() -> Result<Self, SamplerError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| SamplerError::InvalidConfig(format!("{ENDPOINT_ENV} is not set")))?;
        let mut config = Self::new(endpoint);
        config.token = std::env::var(TOKEN_ENV).ok();
        if let Ok(secs) = std::env::var(TIMEOUT_ENV) {
            let secs: u64 = secs.parse().map_err(|_| {
                SamplerError::InvalidConfig(format!("{TIMEOUT_ENV} must be whole seconds"))
            })?;
            config.timeout = Duration::from_secs(secs);
        }
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self, SamplerError> {
        let file: RemoteFile =
            toml::from_str(text).map_err(|e| SamplerError::InvalidConfig(e.to_string()))?;
        let mut config = Self::new(file.endpoint);
        config.token = file.token;
        if let Some(secs) = file.timeout_secs {
            config.timeout = Duration::from_secs(secs);
        }
        if let Some(ms) = file.poll_interval_ms {
            config.poll_interval = Duration::from_millis(ms);
        }
        if let Some(reads) = file.num_reads {
            config.num_reads = reads;
        }
        config.chain_strength = file.chain_strength;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SamplerError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            SamplerError::InvalidConfig(format!("{}: {e}", path.as_ref().display()))
        })?;
        Self::from_toml(&text)
    }
}

fn transport_error(e: ureq::Error, timeout: Duration) -> SamplerError {
    match e {
        ureq::Error::Timeout(_) => SamplerError::Timeout(timeout),
        ureq::Error::Io(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) =>
        {
            SamplerError::Timeout(timeout)
        }
        other => SamplerError::ConnectionFailed(other.to_string()),
    }
}

fn parse_samples(qubo: &Qubo, body: &str) -> Result<Vec<(Vec<bool>, i64, u64)>, SamplerError> {
    let n = qubo.num_variables();
    let mut reads = Vec::new();
    for (index, line) in body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
    {
        let malformed =
            |why: &str| SamplerError::MalformedResponse(format!("sample {index}: {why}"));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [bits, energy, occurrences] = fields[..] else {
            return Err(malformed("expected `bitstring energy occurrences`"));
        };
        if bits.len() != n {
            return Err(malformed(&format!(
                "bitstring has {} bits, model has {n}",
                bits.len()
            )));
        }
        let assignment = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(malformed("bitstring must contain only 0 and 1")),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        let remote: i64 = energy
            .parse()
            .map_err(|_| malformed("energy is not an integer"))?;
        let occurrences: u64 = occurrences
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| malformed("occurrences must be a positive integer"))?;
        let local = qubo.energy(&assignment).expect("length checked");
        if local != remote {
            return Err(SamplerError::EnergyMismatch {
                index,
                remote,
                local,
            });
        }
        reads.push((assignment, local, occurrences));
    }
    Ok(reads)
}

pub fn solve_remote(qubo: &Qubo, config: &RemoteConfig) -> Result<SampleSet, SamplerError> {
    if config.num_reads == 0 {
        return Err(SamplerError::InvalidConfig(
            "num_reads must be at least 1".into(),
        ));
    }
    let started = Instant::now();
    let deadline = started + config.timeout;
    let remaining = || deadline.saturating_duration_since(Instant::now());
    let agent_for = |budget: Duration| -> ureq::Agent {
        ureq::Agent::config_builder()
            .timeout_global(Some(budget.max(Duration::from_millis(1))))
            .http_status_as_error(false)
            .build()
            .into()
    };
    let base = config.endpoint.trim_end_matches('/');
    let auth = config.token.as_ref().map(|t| format!("Bearer {t}"));

    let mut request = agent_for(remaining())
        .post(format!("{base}/problems"))
        .query("num_reads", config.num_reads.to_string())
        .content_type("text/plain");
    if let Some(cs) = config.chain_strength {
        request = request.query("chain_strength", cs.to_string());
    }
    if let Some(auth) = &auth {
        request = request.header("Authorization", auth);
    }
    let mut response = request
        .send(qubo.to_export())
        .map_err(|e| transport_error(e, config.timeout))?;
    let status = response.status();
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| transport_error(e, config.timeout))?;
    if !status.is_success() {
        return Err(SamplerError::ConnectionFailed(format!(
            "submit rejected with {status}: {}",
            body.trim()
        )));
    }
    let id = body.trim().to_string();
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(SamplerError::MalformedResponse(format!(
            "bad problem id `{id}`"
        )));
    }

    loop {
        if remaining().is_zero() {
            return Err(SamplerError::Timeout(config.timeout));
        }
        let mut request = agent_for(remaining()).get(format!("{base}/problems/{id}"));
        if let Some(auth) = &auth {
            request = request.header("Authorization", auth);
        }
        let mut response = request
            .call()
            .map_err(|e| transport_error(e, config.timeout))?;
        let status = response.status();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| transport_error(e, config.timeout))?;
        if !status.is_success() {
            return Err(SamplerError::ConnectionFailed(format!(
                "poll rejected with {status}: {}",
                body.trim()
            )));
        }
        let (head, rest) = body.split_once('\n').unwrap_or((body.as_str(), ""));
        match head.trim() {
            "PENDING" | "RUNNING" => {
                thread::sleep(config.poll_interval.min(remaining()));
            }
            "COMPLETED" => {
                let reads = parse_samples(qubo, rest)?;
                let total: u64 = reads.iter().map(|r| r.2).sum();
                if total != config.num_reads as u64 {
                    return Err(SamplerError::MalformedResponse(format!(
                        "occurrences sum to {total}, requested {} reads",
                        config.num_reads
                    )));
                }
                return Ok(SampleSet::from_reads(
                    reads,
                    SampleSetInfo {
                        backend: "remote".into(),
                        num_reads: config.num_reads,
                        num_sweeps: None,
                        seed: None,
                        wall_time: started.elapsed(),
                    },
                ));
            }
            other if other.starts_with("FAILED") => {
                return Err(SamplerError::ConnectionFailed(format!(
                    "remote solver: {other}"
                )));
            }
            other => {
                return Err(SamplerError::MalformedResponse(format!(
                    "unknown status `{other}`"
                )));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteSampler {
    pub config: RemoteConfig,
}

impl Sampler for RemoteSampler {
    fn name(&self) -> &str {
        "remote"
    }

    fn sample(&self, qubo: &Qubo) -> Result<SampleSet, SamplerError> {
        solve_remote(qubo, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var() -> Qubo {
        let mut b = Qubo::builder(2);
        b.add_linear(0, 3).add_quadratic(0, 1, -1).add_offset(1);
        b.build()
    }

    #[test]
    fn parses_and_verifies_samples() {
        let q = two_var();
        let reads = parse_samples(&q, "00 1 3\n11 3 2\n").unwrap();
        assert_eq!(
            reads,
            vec![(vec![false, false], 1, 3), (vec![true, true], 3, 2)]
        );
        assert!(matches!(
            parse_samples(&q, "10 9 1\n"),
            Err(SamplerError::EnergyMismatch {
                index: 0,
                remote: 9,
                local: 4
            })
        ));
        assert!(matches!(
            parse_samples(&q, "101 1 1\n"),
            Err(SamplerError::MalformedResponse(_))
        ));
        assert!(matches!(
            parse_samples(&q, "0x 1 1\n"),
            Err(SamplerError::MalformedResponse(_))
        ));
        assert!(matches!(
            parse_samples(&q, "00 1 0\n"),
            Err(SamplerError::MalformedResponse(_))
        ));
    }

    #[test]
    fn config_from_toml() {
        let c = RemoteConfig::from_toml(
            "endpoint = \"http://localhost:1\"\ntoken = \"abc\"\ntimeout_secs = 5\nchain_strength = 39.0\n",
        )
        .unwrap();
        assert_eq!(c.endpoint, "http://localhost:1");
        assert_eq!(c.token.as_deref(), Some("abc"));
        assert_eq!(c.timeout, Duration::from_secs(5));
        assert_eq!(c.chain_strength, Some(39.0));
        assert!(RemoteConfig::from_toml("endpoint = 3").is_err());
        assert!(RemoteConfig::from_toml("endpoint = \"x\"\nbogus = 1").is_err());
    }
}
