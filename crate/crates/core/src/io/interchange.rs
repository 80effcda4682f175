//! Line-delimited JSON scenario interchange.
//!
//! One scenario per line, keys in the fixed order
//! `id, source, city, freq_hz, current_index, timestamps, focal_agents, tracks, map`.
//! Floats are written as shortest round-trip decimals so that a parse of a
//! written scenario is bit-identical to the original.

use serde::Serialize;
use serde_json::Value;

use super::ScenarioError;
use crate::scenario::{
    validate_scenario, AgentState, AgentTrack, AgentType, BoxSize, LineType, MapPolyline,
    Scenario, DEFAULT_CURRENT_INDEX,
};
use crate::FREQ_HZ;

#[derive(Serialize)]
struct DocOut<'a> {
    id: &'a str,
    source: &'a str,
    city: &'a str,
    freq_hz: u32,
    current_index: usize,
    timestamps: &'a [f64],
    focal_agents: &'a [String],
    tracks: Vec<TrackOut<'a>>,
    map: Vec<LineOut<'a>>,
}

#[derive(Serialize)]
struct TrackOut<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<[f64; 2]>,
    valid: Vec<u8>,
    states: Vec<[f64; 5]>,
}

#[derive(Serialize)]
struct LineOut<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    kind: &'static str,
    points: &'a [[f64; 2]],
}

/// Serializes a scenario as one canonical line (no trailing newline).
pub fn write_scenario(s: &Scenario) -> Vec<u8> {
    let doc = DocOut {
        id: &s.id,
        source: &s.source,
        city: &s.city,
        freq_hz: s.freq_hz,
        current_index: s.current_index,
        timestamps: &s.timestamps,
        focal_agents: &s.focal_agents,
        tracks: s
            .tracks
            .iter()
            .map(|t| TrackOut {
                id: &t.id,
                kind: t.agent_type.as_str(),
                size: t.size.map(|b| [b.length, b.width]),
                valid: t.valid.iter().map(|&v| v as u8).collect(),
                states: t
                    .states
                    .iter()
                    .map(|st| [st.x, st.y, st.vx, st.vy, st.heading])
                    .collect(),
            })
            .collect(),
        map: s
            .map
            .iter()
            .map(|l| LineOut {
                id: &l.id,
                kind: l.line_type.as_str(),
                points: &l.points,
            })
            .collect(),
    };
    serde_json::to_vec(&doc).expect("scenario serializes")
}

struct Node<'a> {
    value: &'a Value,
    path: String,
}

impl<'a> Node<'a> {
    fn err(&self, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Schema {
            path: if self.path.is_empty() { "/".into() } else { self.path.clone() },
            message: message.into(),
        }
    }

    fn field(&self, key: &str) -> Result<Node<'a>, ScenarioError> {
        self.opt_field(key).ok_or_else(|| ScenarioError::Schema {
            path: format!("{}/{}", self.path, key),
            message: "missing field".into(),
        })
    }

    fn opt_field(&self, key: &str) -> Option<Node<'a>> {
        self.value.get(key).filter(|v| !v.is_null()).map(|value| Node {
            value,
            path: format!("{}/{}", self.path, key),
        })
    }

    fn str(&self) -> Result<&'a str, ScenarioError> {
        self.value.as_str().ok_or_else(|| self.err("expected string"))
    }

    fn f64(&self) -> Result<f64, ScenarioError> {
        self.value.as_f64().ok_or_else(|| self.err("expected number"))
    }

    fn u64(&self) -> Result<u64, ScenarioError> {
        self.value
            .as_u64()
            .ok_or_else(|| self.err("expected non-negative integer"))
    }

    fn items(&self) -> Result<Vec<Node<'a>>, ScenarioError> {
        let arr = self.value.as_array().ok_or_else(|| self.err("expected array"))?;
        Ok(arr
            .iter()
            .enumerate()
            .map(|(i, value)| Node {
                value,
                path: format!("{}/{}", self.path, i),
            })
            .collect())
    }

    fn f64_array<const N: usize>(&self) -> Result<[f64; N], ScenarioError> {
        let items = self.items()?;
        if items.len() != N {
            return Err(self.err(format!("expected {N} numbers, got {}", items.len())));
        }
        let mut out = [0.0; N];
        for (o, it) in out.iter_mut().zip(&items) {
            *o = it.f64()?;
        }
        Ok(out)
    }

    fn flag(&self) -> Result<bool, ScenarioError> {
        match self.value {
            Value::Bool(b) => Ok(*b),
            Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
            Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
            _ => Err(self.err("expected 0 or 1")),
        }
    }
}

fn parse_track(node: &Node) -> Result<AgentTrack, ScenarioError> {
    let size = match node.opt_field("size") {
        Some(n) => {
            let [length, width] = n.f64_array::<2>()?;
            Some(BoxSize { length, width })
        }
        None => None,
    };
    let states = node
        .field("states")?
        .items()?
        .iter()
        .map(|n| {
            n.f64_array::<5>().map(|[x, y, vx, vy, heading]| AgentState {
                x,
                y,
                vx,
                vy,
                heading,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(AgentTrack {
        id: node.field("id")?.str()?.to_string(),
        agent_type: AgentType::from_source_name(node.field("type")?.str()?),
        states,
        valid: node
            .field("valid")?
            .items()?
            .iter()
            .map(Node::flag)
            .collect::<Result<_, _>>()?,
        size,
    })
}

fn parse_line(node: &Node) -> Result<MapPolyline, ScenarioError> {
    Ok(MapPolyline {
        id: node.field("id")?.str()?.to_string(),
        line_type: LineType::from_source_name(node.field("type")?.str()?),
        points: node
            .field("points")?
            .items()?
            .iter()
            .map(Node::f64_array::<2>)
            .collect::<Result<_, _>>()?,
    })
}

/// Parses one scenario document, truncates it to 8 s and validates it.
pub fn parse_scenario(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| ScenarioError::Json(e.to_string()))?;
    let root = Node {
        value: &value,
        path: String::new(),
    };
    if !value.is_object() {
        return Err(root.err("expected object"));
    }
    let freq = root.field("freq_hz")?;
    let freq_hz = freq.u64()?;
    if freq_hz != FREQ_HZ as u64 {
        return Err(freq.err(format!(
            "unsupported rate {freq_hz} Hz; resample to {FREQ_HZ} Hz before ingestion"
        )));
    }
    let current_index = match root.opt_field("current_index") {
        Some(n) => n.u64()? as usize,
        None => DEFAULT_CURRENT_INDEX,
    };
    let mut s = Scenario {
        id: root.field("id")?.str()?.to_string(),
        source: root.field("source")?.str()?.to_string(),
        city: root.field("city")?.str()?.to_string(),
        freq_hz: FREQ_HZ,
        current_index,
        timestamps: root
            .field("timestamps")?
            .items()?
            .iter()
            .map(Node::f64)
            .collect::<Result<_, _>>()?,
        focal_agents: root
            .field("focal_agents")?
            .items()?
            .iter()
            .map(|n| n.str().map(str::to_string))
            .collect::<Result<_, _>>()?,
        tracks: root
            .field("tracks")?
            .items()?
            .iter()
            .map(parse_track)
            .collect::<Result<_, _>>()?,
        map: root
            .field("map")?
            .items()?
            .iter()
            .map(parse_line)
            .collect::<Result<_, _>>()?,
    };
    s.truncate_to_max_duration();
    let violations = validate_scenario(&s);
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(ScenarioError::Semantic(violations))
    }
}

/// Parses every non-blank line of an interchange file.
pub fn parse_scenario_lines(text: &[u8]) -> Vec<Result<Scenario, ScenarioError>> {
    text.split(|&b| b == b'\n')
        .filter(|line| line.iter().any(|b| !b.is_ascii_whitespace()))
        .map(parse_scenario)
        .collect()
}
