use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::episode::{Action, Episode, Observation, Role};
use crate::network::{classify_hard, Slice};

/// Upper edges of the latency bins; the last bin is open.
pub const LATENCY_BINS_MS: [f64; 4] = [10.0, 20.0, 40.0, 100.0];
const TOP: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub name: String,
    pub count: usize,
    pub avg_per_episode: f64,
    pub per_slice: BTreeMap<Slice, usize>,
    /// Share of uses that happened on a hard network turn.
    pub degraded_share: f64,
    /// Acknowledgement statuses, for A2A tasks.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub statuses: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntentRow {
    pub intent: String,
    pub role: Role,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyBinRow {
    pub bin: String,
    pub per_slice: BTreeMap<Slice, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub episodes: usize,
    pub turns: usize,
    pub top_intents: Vec<IntentRow>,
    pub mcp_tools: Vec<CountRow>,
    pub a2a_tasks: Vec<CountRow>,
    pub latency_bins: Vec<LatencyBinRow>,
}

/// Lowercased, digits folded to `#`, whitespace collapsed.
fn normalize_intent(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_number = false;
    for c in s.chars() {
        if c.is_ascii_digit() || (in_number && c == '.') {
            if !in_number {
                out.push('#');
            }
            in_number = true;
        } else {
            in_number = false;
            out.extend(c.to_lowercase());
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn bin_label(i: usize) -> String {
    match i {
        0 => format!("<{}", LATENCY_BINS_MS[0]),
        i if i < LATENCY_BINS_MS.len() => format!("{}-{}", LATENCY_BINS_MS[i - 1], LATENCY_BINS_MS[i]),
        _ => format!(">={}", LATENCY_BINS_MS[LATENCY_BINS_MS.len() - 1]),
    }
}

#[derive(Default)]
struct Tally {
    count: usize,
    hard: usize,
    per_slice: BTreeMap<Slice, usize>,
    statuses: BTreeMap<String, usize>,
}

fn rows(tallies: BTreeMap<String, Tally>, episodes: usize) -> Vec<CountRow> {
    let mut rows: Vec<CountRow> = tallies
        .into_iter()
        .map(|(name, t)| CountRow {
            name,
            count: t.count,
            avg_per_episode: if episodes == 0 { 0.0 } else { t.count as f64 / episodes as f64 },
            per_slice: t.per_slice,
            degraded_share: if t.count == 0 { 0.0 } else { t.hard as f64 / t.count as f64 },
            statuses: t.statuses,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    rows
}

/// Frequency tables over valid episodes.
pub fn analyze<'a>(episodes: impl IntoIterator<Item = &'a Episode>) -> AnalyticsReport {
    let mut n = 0;
    let mut turns = 0;
    let mut intents: BTreeMap<(String, Role), usize> = BTreeMap::new();
    let mut mcp: BTreeMap<String, Tally> = BTreeMap::new();
    let mut a2a: BTreeMap<String, Tally> = BTreeMap::new();
    let mut bins: Vec<BTreeMap<Slice, usize>> = vec![BTreeMap::new(); LATENCY_BINS_MS.len() + 1];

    for e in episodes {
        n += 1;
        for t in &e.turns {
            turns += 1;
            *intents.entry((normalize_intent(&t.intent), t.role)).or_default() += 1;
            let bin = LATENCY_BINS_MS.iter().position(|&edge| t.network.latency_ms < edge).unwrap_or(LATENCY_BINS_MS.len());
            *bins[bin].entry(t.network.slice).or_default() += 1;
            let hard = classify_hard(&t.network);
            let tally = match &t.action {
                Some(Action::McpCall(c)) => mcp.entry(c.name.clone()).or_default(),
                Some(Action::A2aTask(a)) => a2a.entry(a.task.clone()).or_default(),
                _ => continue,
            };
            tally.count += 1;
            tally.hard += usize::from(hard);
            *tally.per_slice.entry(t.network.slice).or_default() += 1;
            if let Some(Observation::A2aAck(ack)) = &t.observation {
                let status = serde_json::to_value(ack.status)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default();
                *tally.statuses.entry(status).or_default() += 1;
            }
        }
    }

    let mut top: Vec<IntentRow> = intents
        .into_iter()
        .map(|((intent, role), count)| IntentRow { intent, role, count })
        .collect();
    top.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.intent.cmp(&b.intent)));
    top.truncate(TOP);

    AnalyticsReport {
        episodes: n,
        turns,
        top_intents: top,
        mcp_tools: rows(mcp, n),
        a2a_tasks: rows(a2a, n),
        latency_bins: bins
            .into_iter()
            .enumerate()
            .map(|(i, per_slice)| LatencyBinRow {
                bin: bin_label(i),
                per_slice,
            })
            .collect(),
    }
}

impl AnalyticsReport {
    /// Plain-text tables for terminals.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let slices = Slice::ALL;
        let _ = writeln!(s, "episodes: {}  turns: {}\n", self.episodes, self.turns);
        let _ = writeln!(s, "top intents");
        for r in &self.top_intents {
            let _ = writeln!(s, "  {:>6}  {:<6} {}", r.count, r.role.as_str(), r.intent);
        }
        for (title, table) in [("mcp tools", &self.mcp_tools), ("a2a tasks", &self.a2a_tasks)] {
            let _ = writeln!(s, "\n{title}");
            let _ = writeln!(
                s,
                "  {:<24} {:>7} {:>8} {:>7} {:>7} {:>7} {:>9}",
                "name", "count", "per_ep", "URLLC", "eMBB", "mMTC", "degraded"
            );
            for r in table.iter() {
                let by = |sl: Slice| r.per_slice.get(&sl).copied().unwrap_or(0);
                let _ = writeln!(
                    s,
                    "  {:<24} {:>7} {:>8.3} {:>7} {:>7} {:>7} {:>9.3}",
                    r.name,
                    r.count,
                    r.avg_per_episode,
                    by(slices[0]),
                    by(slices[1]),
                    by(slices[2]),
                    r.degraded_share
                );
            }
        }
        let _ = writeln!(s, "\nlatency bins (ms) by slice");
        for r in &self.latency_bins {
            let by = |sl: Slice| r.per_slice.get(&sl).copied().unwrap_or(0);
            let _ = writeln!(s, "  {:<10} {:>7} {:>7} {:>7}", r.bin, by(slices[0]), by(slices[1]), by(slices[2]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intents_fold_numbers() {
        assert_eq!(normalize_intent("Fly to (50, 30.5, 40)  now"), "fly to (#, #, #) now");
        assert_eq!(normalize_intent("battery 12.0%."), "battery #%.");
    }

    #[test]
    fn empty_corpus_gives_empty_tables() {
        let r = analyze(std::iter::empty());
        assert_eq!(r.episodes, 0);
        assert!(r.top_intents.is_empty() && r.mcp_tools.is_empty() && r.a2a_tasks.is_empty());
        assert!(r.latency_bins.iter().all(|b| b.per_slice.is_empty()));
    }
}
