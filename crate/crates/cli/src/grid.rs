use serde::{Deserialize, Serialize};

/// A grid of dimensions: `a:b` doubles from `a` while `≤ b`, `a:b:s` steps by `s`, and
/// `a,b,c` lists values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Text(String),
    List(Vec<usize>),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<usize>, String> {
        match self {
            Grid::List(v) if v.is_empty() => Err("empty grid".into()),
            Grid::List(v) => Ok(v.clone()),
            Grid::Text(s) => parse_grid(s),
        }
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("grid {text:?}: expected `a:b`, `a:b:step` or a comma list");
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let t = text.trim();
    let values = if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        let (a, b) = match parts.len() {
            2 | 3 => (num(parts[0])?, num(parts[1])?),
            _ => return Err(bad()),
        };
        if a == 0 || a > b {
            return Err(format!("grid {text:?}: need 0 < start ≤ end"));
        }
        let mut out = vec![a];
        match parts.get(2) {
            Some(s) => {
                let step = num(s)?;
                if step == 0 {
                    return Err(format!("grid {text:?}: zero step"));
                }
                while let Some(next) = out.last().map(|v| v + step).filter(|v| *v <= b) {
                    out.push(next);
                }
            }
            None => {
                while let Some(next) = out.last().map(|v| v * 2).filter(|v| *v <= b) {
                    out.push(next);
                }
            }
        }
        out
    } else {
        t.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_grid("25:200").unwrap(), vec![25, 50, 100, 200]);
        assert_eq!(parse_grid("25:210").unwrap(), vec![25, 50, 100, 200]);
        assert_eq!(parse_grid("2:10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_grid("2, 10,50").unwrap(), vec![2, 10, 50]);
        assert_eq!(parse_grid("7").unwrap(), vec![7]);
        for bad in ["", "0:4", "5:2", "1:9:0", "a,b", "1:2:3:4"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
        assert_eq!(Grid::List(vec![3, 4]).values().unwrap(), vec![3, 4]);
    }
}
