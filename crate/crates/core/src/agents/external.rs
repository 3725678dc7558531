//! Line-delimited JSON bridge to a policy running in another process.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde_json::json;

use super::{AgentError, AgentPolicy, AgentReply, PolicyContext};
use crate::tools::Protocol;

/// One request line per agent turn; one reply line `{"intent", "action"?, "role"?}` back.
/// Replies that cannot be read or parsed become an empty intent, which fails validation.
pub struct ExternalAgent {
    name: String,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalAgent {
    pub fn spawn(name: &str, command: &str) -> Result<ExternalAgent, AgentError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AgentError::External(format!("cannot start '{command}': {e}")))?;
        let stdin = child.stdin.take().ok_or_else(|| AgentError::External("no stdin".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| AgentError::External("no stdout".into()))?;
        Ok(ExternalAgent {
            name: name.to_string(),
            child,
            stdin,
            stdout: BufReader::new(stdout),
        })
    }

    fn exchange(&mut self, ctx: &PolicyContext<'_>) -> Option<AgentReply> {
        let s = ctx.state;
        let p = s.position();
        let request = json!({
            "turn_index": ctx.turn_index,
            "strictness": ctx.strictness,
            "history": ctx.history,
            "state": {
                "position": [p.x, p.y, p.z],
                "velocity": s.speed(),
                "yaw": s.kinematics.yaw(),
                "battery": s.battery,
                "flags": s.flags,
                "landed": s.landed,
                "waypoint_reached": s.waypoint_reached,
                "mission_completed": s.mission_completed,
            },
            "network": ctx.network,
            "mission": ctx.mission,
            "peers": ctx.peers,
            "tools": {
                "mcp": ctx.registry.names(Protocol::Mcp),
                "a2a": ctx.registry.names(Protocol::A2a),
            },
        });
        writeln!(self.stdin, "{request}").ok()?;
        self.stdin.flush().ok()?;
        let mut line = String::new();
        if self.stdout.read_line(&mut line).ok()? == 0 {
            return None;
        }
        serde_json::from_str(line.trim()).ok()
    }
}

impl AgentPolicy for ExternalAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply {
        self.exchange(ctx).unwrap_or_else(|| {
            log::warn!("{}: unreadable reply at turn {}", self.name, ctx.turn_index);
            AgentReply::default()
        })
    }
}

impl Drop for ExternalAgent {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
