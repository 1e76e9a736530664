//! Block density matrices and the four-type pairwise community classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Group, LabeledDigraph};

/// How block edge counts were turned into densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `e_rs / (N_r N_s)` off the diagonal, `e_rr / (N_r (N_r - 1))` on it.
    PossiblePairs,
    /// `e_rs / (N_r N_s)` everywhere; the large-group limit of `PossiblePairs`.
    PossiblePairsLargeN,
    /// `e_rs / (e_r^out e_s^in)`.
    DegreeProduct,
    /// Entries supplied directly by the caller.
    External,
}

/// 2x2 matrix `w[r][s]` of edge densities from group `r` to group `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub w: [[f64; 2]; 2],
    pub normalization: Normalization,
    /// Group sizes behind the denominators, when the normalization uses them.
    pub group_sizes: Option<[f64; 2]>,
}

impl DensityMatrix {
    /// Wraps caller-supplied entries. Entries must be finite and nonnegative.
    pub fn from_entries(w: [[f64; 2]; 2]) -> Result<Self> {
        let m = Self {
            w,
            normalization: Normalization::External,
            group_sizes: None,
        };
        m.check_entries()?;
        Ok(m)
    }

    pub fn get(&self, from: Group, to: Group) -> f64 {
        self.w[from.index()][to.index()]
    }

    fn check_entries(&self) -> Result<()> {
        for (row, r) in self.w.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::NonFiniteDensity { row, col, value });
                }
            }
        }
        Ok(())
    }

    /// The same matrix with group labels exchanged.
    pub fn relabeled(&self) -> Self {
        let w = self.w;
        Self {
            w: [[w[1][1], w[1][0]], [w[0][1], w[0][0]]],
            normalization: self.normalization,
            group_sizes: self.group_sizes.map(|[a, b]| [b, a]),
        }
    }
}

/// Pairwise community type of two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "TypeRecord", try_from = "TypeRecord")]
pub enum CommunityType {
    Assortative,
    CorePeriphery {
        core: Group,
    },
    Disassortative,
    SourceBasin {
        basin: Group,
    },
    /// No strict ranking matched; only ties produce this.
    Unclassified,
}

impl CommunityType {
    pub const ALL: [CommunityType; 7] = [
        CommunityType::Assortative,
        CommunityType::CorePeriphery { core: Group::ZERO },
        CommunityType::CorePeriphery { core: Group::ONE },
        CommunityType::Disassortative,
        CommunityType::SourceBasin { basin: Group::ZERO },
        CommunityType::SourceBasin { basin: Group::ONE },
        CommunityType::Unclassified,
    ];

    /// Short kind code: `A`, `CP`, `D`, `SB` or `U`.
    pub fn code(&self) -> &'static str {
        match self {
            CommunityType::Assortative => "A",
            CommunityType::CorePeriphery { .. } => "CP",
            CommunityType::Disassortative => "D",
            CommunityType::SourceBasin { .. } => "SB",
            CommunityType::Unclassified => "U",
        }
    }

    /// Kind code with the role group appended, e.g. `CP0` or `SB1`.
    pub fn label(&self) -> String {
        match self.role() {
            Some(g) => format!("{}{}", self.code(), g),
            None => self.code().to_string(),
        }
    }

    pub fn role(&self) -> Option<Group> {
        match *self {
            CommunityType::CorePeriphery { core } => Some(core),
            CommunityType::SourceBasin { basin } => Some(basin),
            _ => None,
        }
    }

    pub fn core(&self) -> Option<Group> {
        match *self {
            CommunityType::CorePeriphery { core } => Some(core),
            _ => None,
        }
    }

    pub fn basin(&self) -> Option<Group> {
        match *self {
            CommunityType::SourceBasin { basin } => Some(basin),
            _ => None,
        }
    }

    pub fn is_source_basin(&self) -> bool {
        matches!(self, CommunityType::SourceBasin { .. })
    }

    pub fn is_core_periphery(&self) -> bool {
        matches!(self, CommunityType::CorePeriphery { .. })
    }

    /// The type seen after exchanging the group labels.
    pub fn relabeled(&self) -> Self {
        match *self {
            CommunityType::CorePeriphery { core } => {
                CommunityType::CorePeriphery { core: core.other() }
            }
            CommunityType::SourceBasin { basin } => CommunityType::SourceBasin {
                basin: basin.other(),
            },
            other => other,
        }
    }
}

/// Serialized form `{"kind": "A|CP|D|SB|U", "core": 0|1|null, "basin": 0|1|null}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TypeRecord {
    kind: String,
    core: Option<Group>,
    basin: Option<Group>,
}

impl From<CommunityType> for TypeRecord {
    fn from(t: CommunityType) -> Self {
        TypeRecord {
            kind: t.code().to_string(),
            core: t.core(),
            basin: t.basin(),
        }
    }
}

impl TryFrom<TypeRecord> for CommunityType {
    type Error = String;

    fn try_from(r: TypeRecord) -> std::result::Result<Self, Self::Error> {
        let t = match (r.kind.as_str(), r.core, r.basin) {
            ("A", None, None) => CommunityType::Assortative,
            ("D", None, None) => CommunityType::Disassortative,
            ("U", None, None) => CommunityType::Unclassified,
            ("CP", Some(core), None) => CommunityType::CorePeriphery { core },
            ("SB", None, Some(basin)) => CommunityType::SourceBasin { basin },
            _ => return Err(format!("inconsistent community type record {r:?}")),
        };
        Ok(t)
    }
}

/// Densities from block counts with possible-pairs denominators. `exact`
/// selects `N_r - 1` on the diagonal; otherwise `N_r` is used.
pub fn density_from_counts(
    counts: [[f64; 2]; 2],
    sizes: [f64; 2],
    exact: bool,
) -> Result<DensityMatrix> {
    let mut w = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            let denom = if r == s && exact {
                sizes[r] * (sizes[r] - 1.0)
            } else {
                sizes[r] * sizes[s]
            };
            if !(denom > 0.0) {
                return Err(Error::UndefinedDensity {
                    row: r,
                    col: s,
                    reason: "group too small for a positive pair count",
                });
            }
            w[r][s] = counts[r][s] / denom;
        }
    }
    Ok(DensityMatrix {
        w,
        normalization: if exact {
            Normalization::PossiblePairs
        } else {
            Normalization::PossiblePairsLargeN
        },
        group_sizes: Some(sizes),
    })
}

/// Block edge density normalized by the number of possible ordered pairs.
pub fn density(g: &LabeledDigraph) -> Result<DensityMatrix> {
    let sizes = g.group_sizes();
    for (group, &size) in sizes.iter().enumerate() {
        if size < 2 {
            return Err(Error::GroupTooSmall {
                group,
                size,
                required: 2,
            });
        }
    }
    density_from_counts(
        g.block_edge_counts().as_f64(),
        [sizes[0] as f64, sizes[1] as f64],
        true,
    )
}

/// Block density normalized by realized degrees:
/// `w[r][s] = e_rs / (e_r^out * e_s^in)`.
///
/// Counts may be real-valued so predicted (expected) counts can be used.
pub fn density_degree_normalized(counts: [[f64; 2]; 2]) -> Result<DensityMatrix> {
    let e = counts;
    let out = [e[0][0] + e[0][1], e[1][0] + e[1][1]];
    let inn = [e[0][0] + e[1][0], e[0][1] + e[1][1]];
    let mut w = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            if !(out[r] > 0.0) {
                return Err(Error::UndefinedDensity {
                    row: r,
                    col: s,
                    reason: "zero out-edge total",
                });
            }
            if !(inn[s] > 0.0) {
                return Err(Error::UndefinedDensity {
                    row: r,
                    col: s,
                    reason: "zero in-edge total",
                });
            }
            w[r][s] = e[r][s] / (out[r] * inn[s]);
        }
    }
    Ok(DensityMatrix {
        w,
        normalization: Normalization::DegreeProduct,
        group_sizes: None,
    })
}

pub fn density_degree_normalized_graph(g: &LabeledDigraph) -> Result<DensityMatrix> {
    density_degree_normalized(g.block_edge_counts().as_f64())
}

/// Classifies a density matrix by the strict ranking of its four entries.
///
/// Each type asks that one specific pair of entries strictly exceed the other
/// two: the diagonal for assortative, the off-diagonal for disassortative,
/// row `r` (`w_rr`, `w_rs`) for core-periphery with core `r`, and column `r`
/// (`w_rr`, `w_sr`) for source-basin with basin `r`. At most one pair can
/// hold; when the second and third largest entries tie none does.
pub fn classify(m: &DensityMatrix) -> Result<CommunityType> {
    for (row, r) in m.w.iter().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if value.is_nan() {
                return Err(Error::NonFiniteDensity { row, col, value });
            }
        }
    }
    Ok(classify_entries(m.w))
}

pub(crate) fn classify_entries(w: [[f64; 2]; 2]) -> CommunityType {
    let [[w00, w01], [w10, w11]] = w;
    let top_pair = |a: f64, b: f64, c: f64, d: f64| a.min(b) > c.max(d);

    if top_pair(w00, w11, w01, w10) {
        return CommunityType::Assortative;
    }
    if top_pair(w01, w10, w00, w11) {
        return CommunityType::Disassortative;
    }
    for r in Group::BOTH {
        let s = r.other();
        let (rr, rs, sr, ss) = (
            w[r.index()][r.index()],
            w[r.index()][s.index()],
            w[s.index()][r.index()],
            w[s.index()][s.index()],
        );
        if top_pair(rr, rs, sr, ss) {
            return CommunityType::CorePeriphery { core: r };
        }
        if top_pair(rr, sr, rs, ss) {
            return CommunityType::SourceBasin { basin: r };
        }
    }
    CommunityType::Unclassified
}
