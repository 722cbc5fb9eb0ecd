use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;
use crate::model::{overlap_raw, ModelParams, State};

/// Reference urn of `count:h` when none is given.
pub const DEFAULT_COUNT_URN: u32 = 2;

/// Symbolic description of a target set.
///
/// Textual forms: `singleton:1,2,3`, `pair:(1,1);(2,2)`, `diagonal`,
/// `count:h[:urn]`, `distinct`, `explicit:@file.json` or inline
/// `explicit:[[1,1],[2,2]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetDescriptor {
    Singleton(State),
    Pair(State, State),
    /// All balls in one urn: `{(i, ..., i)}`.
    Diagonal,
    /// States with exactly `overlap` balls in `urn`.
    Count {
        overlap: u32,
        urn: u32,
    },
    /// All balls in different urns; needs `M <= N`.
    Distinct,
    Explicit(Vec<State>),
}

impl SetDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            SetDescriptor::Singleton(_) => "singleton",
            SetDescriptor::Pair(..) => "pair",
            SetDescriptor::Diagonal => "diagonal",
            SetDescriptor::Count { .. } => "count",
            SetDescriptor::Distinct => "distinct",
            SetDescriptor::Explicit(_) => "explicit",
        }
    }

    pub fn count(overlap: u32) -> Self {
        SetDescriptor::Count { overlap, urn: DEFAULT_COUNT_URN }
    }

    /// Whether membership in the symmetric family is guaranteed by the
    /// structure of the descriptor itself.
    pub fn is_structurally_symmetric(&self) -> bool {
        !matches!(self, SetDescriptor::Explicit(_))
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bare = |s: &State| s.positions().iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match self {
            SetDescriptor::Singleton(y) => write!(f, "singleton:{}", bare(y)),
            SetDescriptor::Pair(y, z) => write!(f, "pair:{y};{z}"),
            SetDescriptor::Diagonal => f.write_str("diagonal"),
            SetDescriptor::Count { overlap, urn } if *urn == DEFAULT_COUNT_URN => {
                write!(f, "count:{overlap}")
            }
            SetDescriptor::Count { overlap, urn } => write!(f, "count:{overlap}:{urn}"),
            SetDescriptor::Distinct => f.write_str("distinct"),
            SetDescriptor::Explicit(states) => {
                let json = serde_json::to_string(states).map_err(|_| fmt::Error)?;
                write!(f, "explicit:{json}")
            }
        }
    }
}

impl FromStr for SetDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (s, None),
        };
        let bad = |msg: &str| Error::Descriptor(format!("{s:?}: {msg}"));
        match (kind, rest) {
            ("singleton", Some(r)) => Ok(SetDescriptor::Singleton(r.parse()?)),
            ("pair", Some(r)) => {
                let (a, b) = r.split_once(';').ok_or_else(|| bad("pair needs two states separated by ';'"))?;
                Ok(SetDescriptor::Pair(a.parse()?, b.parse()?))
            }
            ("diagonal", None) => Ok(SetDescriptor::Diagonal),
            ("distinct", None) => Ok(SetDescriptor::Distinct),
            ("count", Some(r)) => {
                let mut parts = r.split(':');
                let overlap = parts
                    .next()
                    .and_then(|h| h.trim().parse().ok())
                    .ok_or_else(|| bad("count needs an integer level h"))?;
                let urn = match parts.next() {
                    Some(u) => u.trim().parse().map_err(|_| bad("invalid reference urn"))?,
                    None => DEFAULT_COUNT_URN,
                };
                if parts.next().is_some() {
                    return Err(bad("too many fields"));
                }
                Ok(SetDescriptor::Count { overlap, urn })
            }
            ("explicit", Some(r)) => {
                let json = if let Some(path) = r.strip_prefix('@') {
                    std::fs::read_to_string(PathBuf::from(path))?
                } else {
                    r.to_string()
                };
                let raw: Vec<Vec<u32>> = serde_json::from_str(&json)
                    .map_err(|e| bad(&format!("expected a JSON array of arrays of integers ({e})")))?;
                Ok(SetDescriptor::Explicit(raw.into_iter().map(State::new).collect()))
            }
            _ => Err(bad("unknown kind; expected singleton|pair|diagonal|count|distinct|explicit")),
        }
    }
}

/// Expands a descriptor into its states, sorted lexicographically.
pub fn materialize(d: &SetDescriptor, params: &ModelParams) -> Result<Vec<State>, Error> {
    let n = params.urns();
    let m = params.balls();
    let mut out = match d {
        SetDescriptor::Singleton(y) => {
            params.check_state(y)?;
            vec![y.clone()]
        }
        SetDescriptor::Pair(y, z) => {
            params.check_state(y)?;
            params.check_state(z)?;
            if y == z {
                return Err(Error::Descriptor(format!("pair needs two distinct states, got {y} twice")));
            }
            vec![y.clone(), z.clone()]
        }
        SetDescriptor::Diagonal => (1..=n).map(|i| params.constant_state(i)).collect(),
        SetDescriptor::Count { overlap, urn } => {
            if *overlap > m {
                return Err(Error::Descriptor(format!("count level {overlap} outside 0..={m}")));
            }
            if *urn < 1 || *urn > n {
                return Err(Error::Descriptor(format!("reference urn {urn} outside 1..={n}")));
            }
            let mut acc = Vec::new();
            count_states(n, m as usize, *urn, *overlap as usize, &mut Vec::new(), &mut acc);
            acc
        }
        SetDescriptor::Distinct => {
            if m > n {
                return Err(Error::Descriptor(format!("all-distinct set needs M <= N, got M={m} N={n}")));
            }
            let mut acc = Vec::new();
            distinct_states(n, m as usize, &mut Vec::new(), &mut vec![false; n as usize + 1], &mut acc);
            acc
        }
        SetDescriptor::Explicit(states) => {
            if states.is_empty() {
                return Err(Error::Descriptor("explicit set is empty".into()));
            }
            let mut seen = BTreeSet::new();
            for s in states {
                params.check_state(s)?;
                if !seen.insert(s.clone()) {
                    return Err(Error::Descriptor(format!("explicit set lists {s} more than once")));
                }
            }
            seen.into_iter().collect()
        }
    };
    out.sort();
    Ok(out)
}

fn count_states(n: u32, m: usize, urn: u32, h: usize, cur: &mut Vec<u32>, out: &mut Vec<State>) {
    let placed = cur.iter().filter(|&&u| u == urn).count();
    let left = m - cur.len();
    if left == 0 {
        out.push(State::new(cur.clone()));
        return;
    }
    for u in 1..=n {
        let needed = h - placed;
        let ok = if u == urn { needed > 0 } else { needed < left };
        if ok {
            cur.push(u);
            count_states(n, m, urn, h, cur, out);
            cur.pop();
        }
    }
}

fn distinct_states(n: u32, m: usize, cur: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<State>) {
    if cur.len() == m {
        out.push(State::new(cur.clone()));
        return;
    }
    for u in 1..=n {
        if !used[u as usize] {
            used[u as usize] = true;
            cur.push(u);
            distinct_states(n, m, cur, used, out);
            cur.pop();
            used[u as usize] = false;
        }
    }
}

/// `counts[k] = |{z in set : s(x, z) = k}|` for `k = 0..=M`.
pub fn overlap_profile(x: &State, set: &[State]) -> Vec<u64> {
    let mut counts = vec![0u64; x.len() + 1];
    for z in set {
        counts[overlap_raw(x.positions(), z.positions())] += 1;
    }
    counts
}

/// Two members of a set whose overlap profiles differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileMismatch {
    pub first: State,
    pub first_profile: Vec<u64>,
    pub second: State,
    pub second_profile: Vec<u64>,
}

fn render_profile(counts: &[u64]) -> String {
    let parts: Vec<String> =
        counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, c)| format!("s={k}:{c}")).collect();
    format!("{{{}}}", parts.join(", "))
}

impl fmt::Display for ProfileMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "overlap profile of {} is {} but profile of {} is {}",
            self.first,
            render_profile(&self.first_profile),
            self.second,
            render_profile(&self.second_profile)
        )
    }
}

/// The first pair of members (in the given order) with different sorted
/// overlap multisets, or `None` if the set is in the symmetric family.
pub fn symmetry_witness(set: &[State]) -> Option<ProfileMismatch> {
    let first = set.first()?;
    let reference = overlap_profile(first, set);
    set[1..].iter().find_map(|y| {
        let profile = overlap_profile(y, set);
        (profile != reference).then(|| ProfileMismatch {
            first: first.clone(),
            first_profile: reference.clone(),
            second: y.clone(),
            second_profile: profile,
        })
    })
}

/// Membership test for the symmetric family: every member sees the same
/// sorted multiset of overlaps with the set (itself included).
pub fn is_symmetric_family(set: &[State]) -> Result<bool, Error> {
    if set.is_empty() {
        return Err(Error::Descriptor("symmetry test on an empty set".into()));
    }
    Ok(symmetry_witness(set).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binomial;

    fn st(s: &str) -> State {
        s.parse().unwrap()
    }

    fn params(n: u32, m: u32) -> ModelParams {
        ModelParams::new(n, m).unwrap()
    }

    #[test]
    fn diagonal_three_urns() {
        let a = materialize(&SetDescriptor::Diagonal, &params(3, 2)).unwrap();
        assert_eq!(a, vec![st("1,1"), st("2,2"), st("3,3")]);
    }

    #[test]
    fn count_and_distinct_small() {
        let a = materialize(&SetDescriptor::count(1), &params(2, 2)).unwrap();
        assert_eq!(a, vec![st("1,2"), st("2,1")]);
        let d = materialize(&SetDescriptor::Distinct, &params(2, 2)).unwrap();
        assert_eq!(d, vec![st("1,2"), st("2,1")]);
    }

    #[test]
    fn set_sizes() {
        for n in 2..=5u32 {
            for m in 1..=4u32 {
                let p = params(n, m);
                assert_eq!(materialize(&SetDescriptor::Diagonal, &p).unwrap().len(), n as usize);
                for h in 0..=m {
                    let a = materialize(&SetDescriptor::Count { overlap: h, urn: 1 }, &p).unwrap();
                    let expected = binomial(m as u64, h as i64) * (n as u64 - 1).pow(m - h);
                    assert_eq!(num_bigint::BigInt::from(a.len()), expected);
                    assert!(a.iter().all(|x| x.positions().iter().filter(|&&u| u == 1).count() == h as usize));
                }
                if m <= n {
                    let d = materialize(&SetDescriptor::Distinct, &p).unwrap();
                    let expected: u64 = ((n - m + 1)..=n).map(u64::from).product();
                    assert_eq!(d.len() as u64, expected);
                } else {
                    assert!(materialize(&SetDescriptor::Distinct, &p).is_err());
                }
            }
        }
    }

    #[test]
    fn invalid_descriptors() {
        let p = params(3, 2);
        assert!(materialize(&SetDescriptor::count(3), &p).is_err());
        assert!(materialize(&SetDescriptor::Count { overlap: 1, urn: 4 }, &p).is_err());
        assert!(materialize(&SetDescriptor::Pair(st("1,1"), st("1,1")), &p).is_err());
        assert!(materialize(&SetDescriptor::Explicit(vec![]), &p).is_err());
        assert!(materialize(&SetDescriptor::Explicit(vec![st("1,1"), st("1,1")]), &p).is_err());
        assert!(materialize(&SetDescriptor::Explicit(vec![st("1,5")]), &p).is_err());
        assert!(materialize(&SetDescriptor::Distinct, &params(2, 3)).is_err());
    }

    #[test]
    fn grammar_parsing() {
        assert_eq!("singleton:1,2".parse::<SetDescriptor>().unwrap(), SetDescriptor::Singleton(st("1,2")));
        assert_eq!("pair:(1,1);(2,2)".parse::<SetDescriptor>().unwrap(), SetDescriptor::Pair(st("1,1"), st("2,2")));
        assert_eq!("diagonal".parse::<SetDescriptor>().unwrap(), SetDescriptor::Diagonal);
        assert_eq!("distinct".parse::<SetDescriptor>().unwrap(), SetDescriptor::Distinct);
        assert_eq!("count:2".parse::<SetDescriptor>().unwrap(), SetDescriptor::count(2));
        assert_eq!("count:0:3".parse::<SetDescriptor>().unwrap(), SetDescriptor::Count { overlap: 0, urn: 3 });
        assert_eq!(
            "explicit:[[1,1],[2,2]]".parse::<SetDescriptor>().unwrap(),
            SetDescriptor::Explicit(vec![st("1,1"), st("2,2")])
        );
        for bad in ["", "pair:(1,1)", "count:x", "count:1:2:3", "blob", "diagonal:1", "explicit:[1,2]"] {
            assert!(bad.parse::<SetDescriptor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn explicit_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.json");
        std::fs::write(&path, "[[1,1],[2,2]]").unwrap();
        let d: SetDescriptor = format!("explicit:@{}", path.display()).parse().unwrap();
        assert_eq!(d, SetDescriptor::Explicit(vec![st("1,1"), st("2,2")]));
        assert!("explicit:@/nonexistent/file.json".parse::<SetDescriptor>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "singleton:1,2",
            "pair:(1,1);(2,2)",
            "diagonal",
            "count:2",
            "count:1:3",
            "distinct",
            "explicit:[[1,1],[2,2]]",
        ] {
            let d: SetDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
    }

    #[test]
    fn symmetric_family_examples() {
        assert!(is_symmetric_family(&[st("1,1"), st("2,2"), st("3,3")]).unwrap());
        assert!(is_symmetric_family(&[st("1,2,1"), st("3,3,2")]).unwrap());
        let bad = [st("1,1"), st("1,2"), st("2,2")];
        assert!(!is_symmetric_family(&bad).unwrap());
        let w = symmetry_witness(&bad).unwrap();
        // (1,1): overlaps {2,1,0}; (1,2): overlaps {1,2,1}
        assert_eq!(w.first_profile, vec![1, 1, 1]);
        assert_eq!(w.second_profile, vec![0, 2, 1]);
        assert!(w.to_string().contains("(1,2)"));
        assert!(is_symmetric_family(&[]).is_err());
    }

    #[test]
    fn builtin_kinds_are_symmetric() {
        for n in 2..=6u32 {
            for m in 1..=6u32 {
                let p = params(n, m);
                if p.state_count() > 10_000 {
                    continue;
                }
                let mut kinds = vec![
                    SetDescriptor::Singleton(p.constant_state(1)),
                    SetDescriptor::Pair(p.constant_state(1), p.constant_state(2)),
                    SetDescriptor::Diagonal,
                    SetDescriptor::Distinct,
                ];
                kinds.extend((0..=m).map(SetDescriptor::count));
                for d in kinds {
                    if let Ok(a) = materialize(&d, &p) {
                        assert!(is_symmetric_family(&a).unwrap(), "{d} N={n} M={m}");
                    }
                }
            }
        }
    }
}
