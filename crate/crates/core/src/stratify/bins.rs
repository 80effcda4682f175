use std::str::FromStr;

use serde::Serialize;

use super::StratifyError;

/// Half-open difficulty bins `[e_i, e_{i+1})` plus an overflow bin `[e_last, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifficultyBins {
    pub name: String,
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

fn fmt_edge(e: f64) -> String {
    if e.fract() == 0.0 {
        format!("{e:.0}")
    } else {
        format!("{e}")
    }
}

impl DifficultyBins {
    /// Bins labelled `a–b`, overflow labelled `last+`.
    pub fn from_edges(name: &str, edges: Vec<f64>) -> Result<Self, StratifyError> {
        let labels = edges
            .windows(2)
            .map(|w| format!("{}–{}", fmt_edge(w[0]), fmt_edge(w[1])))
            .chain(edges.last().map(|&e| format!("{}+", fmt_edge(e))))
            .collect();
        Self::with_labels(name, edges, labels)
    }

    /// `labels` has one entry per bin including overflow, i.e. `edges.len()` entries.
    pub fn with_labels(
        name: &str,
        edges: Vec<f64>,
        labels: Vec<String>,
    ) -> Result<Self, StratifyError> {
        if edges.first() != Some(&0.0) {
            return Err(StratifyError::InvalidEdges("edges must start at 0".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(StratifyError::InvalidEdges(
                "edges must be finite and strictly increasing".into(),
            ));
        }
        if labels.len() != edges.len() {
            return Err(StratifyError::InvalidEdges(format!(
                "{} labels for {} bins",
                labels.len(),
                edges.len()
            )));
        }
        Ok(Self {
            name: name.to_string(),
            edges,
            labels,
        })
    }

    /// Decade bins 0–10 … 70–80 and 80+.
    pub fn decade() -> Self {
        Self::from_edges("decade", (0..=8).map(|i| i as f64 * 10.0).collect()).expect("valid")
    }

    /// Easy [0, 30), Medium [30, 50), Hard [50, 100).
    pub fn paper_main() -> Self {
        Self::chunks("paper-main", [0.0, 30.0, 50.0, 100.0])
    }

    /// Easy [0, 30), Medium [30, 60), Hard [60, 100).
    pub fn paper_appendix() -> Self {
        Self::chunks("paper-appendix", [0.0, 30.0, 60.0, 100.0])
    }

    fn chunks(name: &str, edges: [f64; 4]) -> Self {
        let labels = ["Easy", "Medium", "Hard", "100+"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::with_labels(name, edges.to_vec(), labels).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Index of the bin holding `score`; the last index is the overflow bin.
    pub fn bin_index(&self, score: f64) -> usize {
        self.edges.partition_point(|&e| e <= score).saturating_sub(1)
    }

    pub fn label(&self, score: f64) -> &str {
        &self.labels[self.bin_index(score)]
    }
}

/// Accepts `decade`, `paper-main`, `paper-appendix` or `custom:e1,e2,…`.
impl FromStr for DifficultyBins {
    type Err = StratifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decade" => Ok(Self::decade()),
            "paper-main" => Ok(Self::paper_main()),
            "paper-appendix" => Ok(Self::paper_appendix()),
            _ => {
                let body = s.strip_prefix("custom:").ok_or_else(|| {
                    StratifyError::InvalidEdges(format!("unknown bin preset {s:?}"))
                })?;
                let edges = body
                    .split(',')
                    .map(|e| e.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| StratifyError::InvalidEdges(e.to_string()))?;
                Self::from_edges("custom", edges)
            }
        }
    }
}

/// Free-function form of [`DifficultyBins::label`].
pub fn difficulty_bin(score: f64, bins: &DifficultyBins) -> &str {
    bins.label(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(difficulty_bin(35.2, &DifficultyBins::decade()), "30–40");
        assert_eq!(difficulty_bin(29.999, &DifficultyBins::paper_main()), "Easy");
        assert_eq!(difficulty_bin(30.0, &DifficultyBins::paper_main()), "Medium");
        assert_eq!(difficulty_bin(0.0, &DifficultyBins::decade()), "0–10");
        assert_eq!(difficulty_bin(80.0, &DifficultyBins::decade()), "80+");
        assert_eq!(difficulty_bin(55.0, &DifficultyBins::paper_appendix()), "Medium");
        assert_eq!(difficulty_bin(1e6, &DifficultyBins::paper_main()), "100+");
    }

    #[test]
    fn decade_labels() {
        let b = DifficultyBins::decade();
        assert_eq!(b.labels.first().unwrap(), "0–10");
        assert_eq!(b.labels[7], "70–80");
        assert_eq!(b.labels.len(), 9);
    }

    #[test]
    fn parses_presets_and_custom() {
        assert_eq!("paper-main".parse::<DifficultyBins>().unwrap(), DifficultyBins::paper_main());
        let c: DifficultyBins = "custom:0,2.5,10".parse().unwrap();
        assert_eq!(c.labels, vec!["0–2.5", "2.5–10", "10+"]);
        assert!("custom:1,2".parse::<DifficultyBins>().is_err());
        assert!("custom:0,5,5".parse::<DifficultyBins>().is_err());
        assert!("hard-mode".parse::<DifficultyBins>().is_err());
    }

    proptest! {
        #[test]
        fn bins_partition_the_half_line(score in 0.0f64..1e4) {
            let b = DifficultyBins::paper_appendix();
            let i = b.bin_index(score);
            prop_assert!(b.edges[i] <= score);
            if i + 1 < b.edges.len() {
                prop_assert!(score < b.edges[i + 1]);
            }
            let hits = (0..b.len())
                .filter(|&j| b.edges[j] <= score && b.edges.get(j + 1).is_none_or(|&e| score < e))
                .count();
            prop_assert_eq!(hits, 1);
        }
    }
}
