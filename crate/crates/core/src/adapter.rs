//! Client for an external model speaking newline-delimited JSON, either over
//! TCP (`tcp://host:port`) or over the standard streams of a child process
//! (`exec:<program> [args...]`).

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("invalid adapter endpoint {0:?}: expected tcp://host:port or exec:<command>")]
    Endpoint(String),
    #[error("cannot reach adapter at {endpoint}: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: std::io::Error,
    },
    #[error("adapter i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("adapter did not answer within {0:?}")]
    Timeout(Duration),
    #[error("adapter closed the connection")]
    Closed,
    #[error("malformed adapter reply: {0}")]
    Protocol(String),
    #[error("adapter reported an error: {0}")]
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Tcp(String),
    Exec { program: String, args: Vec<String> },
}

impl FromStr for Endpoint {
    type Err = AdapterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(addr) = s.strip_prefix("tcp://") {
            if addr.is_empty() || !addr.contains(':') {
                return Err(AdapterError::Endpoint(s.into()));
            }
            return Ok(Endpoint::Tcp(addr.into()));
        }
        if let Some(cmd) = s.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let program = parts.next().ok_or_else(|| AdapterError::Endpoint(s.into()))?;
            return Ok(Endpoint::Exec {
                program,
                args: parts.collect(),
            });
        }
        Err(AdapterError::Endpoint(s.into()))
    }
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Tcp(a) => write!(f, "tcp://{a}"),
            Endpoint::Exec { program, args } => {
                write!(f, "exec:{program}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
        }
    }
}

struct Connection {
    writer: Box<dyn Write + Send>,
    replies: Receiver<std::io::Result<String>>,
    child: Option<Child>,
}

/// A connected adapter. Requests are serialised over one stream; replies are
/// matched by id and stale replies from timed-out requests are discarded.
pub struct AdapterClient {
    endpoint: Endpoint,
    timeout: Duration,
    next_id: AtomicU64,
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for AdapterClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdapterClient")
            .field("endpoint", &self.endpoint)
            .field("timeout", &self.timeout)
            .finish()
    }
}

fn spawn_reader<R: std::io::Read + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let reader = BufReader::new(reader);
        for line in reader.lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl AdapterClient {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, AdapterError> {
        let conn = match endpoint {
            Endpoint::Tcp(addr) => {
                let connect_err = |source| AdapterError::Connect {
                    endpoint: endpoint.to_string(),
                    source,
                };
                let addrs: Vec<_> = std::net::ToSocketAddrs::to_socket_addrs(addr.as_str())
                    .map_err(connect_err)?
                    .collect();
                let mut last = None;
                let mut stream = None;
                for a in addrs {
                    match TcpStream::connect_timeout(&a, timeout) {
                        Ok(s) => {
                            stream = Some(s);
                            break;
                        }
                        Err(e) => last = Some(e),
                    }
                }
                let stream =
                    stream.ok_or_else(|| {
                        connect_err(last.unwrap_or_else(|| {
                            std::io::Error::new(std::io::ErrorKind::NotFound, "no address resolved")
                        }))
                    })?;
                let read_half = stream.try_clone()?;
                Connection {
                    writer: Box::new(stream),
                    replies: spawn_reader(read_half),
                    child: None,
                }
            }
            Endpoint::Exec { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|source| AdapterError::Connect {
                        endpoint: endpoint.to_string(),
                        source,
                    })?;
                let stdin = child.stdin.take().ok_or(AdapterError::Closed)?;
                let stdout = child.stdout.take().ok_or(AdapterError::Closed)?;
                Connection {
                    writer: Box::new(stdin),
                    replies: spawn_reader(stdout),
                    child: Some(child),
                }
            }
        };
        Ok(AdapterClient {
            endpoint: endpoint.clone(),
            timeout,
            next_id: AtomicU64::new(1),
            conn: Mutex::new(conn),
        })
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Send one request and wait for the reply carrying the same id.
    pub fn request(&self, op: &str, text: &str) -> Result<Value, AdapterError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let mut line = json!({"id": id, "op": op, "text": text}).to_string();
        line.push('\n');
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        conn.writer.write_all(line.as_bytes())?;
        conn.writer.flush()?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let reply = match conn.replies.recv_timeout(left) {
                Ok(r) => r?,
                Err(RecvTimeoutError::Timeout) => return Err(AdapterError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(AdapterError::Closed),
            };
            if reply.trim().is_empty() {
                continue;
            }
            let value: Value =
                serde_json::from_str(&reply).map_err(|e| AdapterError::Protocol(format!("{e}: {reply}")))?;
            let reply_id = match value.get("id") {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(AdapterError::Protocol(format!("reply without id: {reply}"))),
            };
            if reply_id != id {
                log::debug!("discarding stale adapter reply {reply_id}");
                continue;
            }
            if let Some(err) = value.get("error") {
                let msg = err.as_str().map(str::to_string).unwrap_or_else(|| err.to_string());
                return Err(AdapterError::Remote(msg));
            }
            return Ok(value);
        }
    }

    pub fn classify(&self, text: &str) -> Result<f64, AdapterError> {
        let reply = self.request("classify", text)?;
        let score = reply
            .get("score")
            .and_then(Value::as_f64)
            .ok_or_else(|| AdapterError::Protocol(format!("classify reply lacks a score: {reply}")))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(AdapterError::Protocol(format!("score {score} outside [0, 1]")));
        }
        Ok(score)
    }

    /// Ranked candidates for each mask in `text`, in mask order.
    pub fn fill_mask(&self, text: &str) -> Result<Vec<Vec<String>>, AdapterError> {
        let reply = self.request("fill_mask", text)?;
        let bad = || AdapterError::Protocol(format!("fill_mask reply lacks candidates: {reply}"));
        let lists = reply.get("candidates").and_then(Value::as_array).ok_or_else(bad)?;
        lists
            .iter()
            .map(|l| {
                l.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|c| c.as_str().map(str::to_string).ok_or_else(bad))
                    .collect()
            })
            .collect()
    }
}

impl Drop for AdapterClient {
    fn drop(&mut self) {
        let conn = self.conn.get_mut().unwrap_or_else(|p| p.into_inner());
        if let Some(child) = conn.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::net::TcpListener;

    /// One-connection NDJSON server answering with `reply(request)`.
    pub(crate) fn mock_server(reply: fn(&Value) -> Option<Value>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut out = stream.try_clone().unwrap();
            for line in BufReader::new(stream).lines() {
                let Ok(line) = line else { break };
                let req: Value = serde_json::from_str(&line).unwrap();
                if let Some(r) = reply(&req) {
                    writeln!(out, "{r}").unwrap();
                }
            }
        });
        format!("tcp://{addr}")
    }

    #[test]
    fn endpoint_parsing() {
        assert_eq!(
            "tcp://localhost:9000".parse::<Endpoint>().unwrap(),
            Endpoint::Tcp("localhost:9000".into())
        );
        let e: Endpoint = "exec:python3 model.py --fast".parse().unwrap();
        assert_eq!(e.to_string(), "exec:python3 model.py --fast");
        assert!("http://x".parse::<Endpoint>().is_err());
        assert!("exec:".parse::<Endpoint>().is_err());
        assert!("tcp://nohost".parse::<Endpoint>().is_err());
    }

    #[test]
    fn tcp_classify_and_fill() {
        let ep = mock_server(|req| {
            let id = req["id"].clone();
            Some(match req["op"].as_str() {
                Some("classify") => json!({"id": id, "score": 0.75}),
                _ => json!({"id": id, "candidates": [["system", "module"], ["is"]]}),
            })
        });
        let client = AdapterClient::connect(&ep.parse().unwrap(), DEFAULT_TIMEOUT).unwrap();
        assert_eq!(client.classify("x").unwrap(), 0.75);
        let c = client.fill_mask("[MASK] [MASK]").unwrap();
        assert_eq!(c[0][0], "system");
        assert_eq!(c[1], ["is"]);
    }

    #[test]
    fn remote_errors_and_timeouts() {
        let ep = mock_server(|req| {
            if req["text"] == "silent" {
                None
            } else {
                Some(json!({"id": req["id"], "error": "model unavailable"}))
            }
        });
        let client = AdapterClient::connect(&ep.parse().unwrap(), Duration::from_millis(200)).unwrap();
        assert!(matches!(client.classify("x"), Err(AdapterError::Remote(_))));
        assert!(matches!(client.classify("silent"), Err(AdapterError::Timeout(_))));
    }

    #[test]
    fn unreachable_endpoint() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let err = AdapterClient::connect(&Endpoint::Tcp(addr.to_string()), Duration::from_millis(200)).unwrap_err();
        assert!(matches!(err, AdapterError::Connect { .. }));
    }

    #[test]
    fn exec_transport() {
        if Command::new("python3").arg("--version").output().is_err() {
            return;
        }
        let script = "import sys, json\nfor l in sys.stdin:\n    r = json.loads(l)\n    print(json.dumps({'id': r['id'], 'score': 0.25}), flush=True)\n";
        let ep = Endpoint::Exec {
            program: "python3".into(),
            args: vec!["-c".into(), script.into()],
        };
        let client = AdapterClient::connect(&ep, DEFAULT_TIMEOUT).unwrap();
        assert_eq!(client.classify("anything").unwrap(), 0.25);
        assert_eq!(client.classify("again").unwrap(), 0.25);
    }
}
