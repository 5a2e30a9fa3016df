//! Comma lists and `start:stop:step` ranges.

use std::str::FromStr;

/// Values of a flag such as `0.1,0.5` or `0.1:0.9:0.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_one<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse '{}'", s.trim()))
}

impl FromStr for List<f64> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let fields: Vec<&str> = part.split(':').collect();
            match fields.len() {
                1 => out.push(parse_one(fields[0])?),
                3 => {
                    let (a, b, step): (f64, f64, f64) =
                        (parse_one(fields[0])?, parse_one(fields[1])?, parse_one(fields[2])?);
                    if !(step > 0.0) || b < a {
                        return Err(format!("range '{part}' needs start <= stop and step > 0"));
                    }
                    // round so that 0.1:0.9:0.1 yields exactly nine decimal values
                    let count = ((b - a) / step + 1e-9).floor() as usize;
                    for i in 0..=count {
                        let v = a + i as f64 * step;
                        out.push((v * 1e12).round() / 1e12);
                    }
                }
                _ => return Err(format!("'{part}' is neither a value nor start:stop:step")),
            }
        }
        Ok(List(out))
    }
}

impl FromStr for List<u32> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let fields: Vec<&str> = part.split(':').collect();
            match fields.len() {
                1 => out.push(parse_one(fields[0])?),
                3 => {
                    let (a, b, step): (u32, u32, u32) =
                        (parse_one(fields[0])?, parse_one(fields[1])?, parse_one(fields[2])?);
                    if step == 0 || b < a {
                        return Err(format!("range '{part}' needs start <= stop and step > 0"));
                    }
                    out.extend((a..=b).step_by(step as usize));
                }
                _ => return Err(format!("'{part}' is neither a value nor start:stop:step")),
            }
        }
        Ok(List(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_range_has_nine_values() {
        let List(ps) = "0.1:0.9:0.1".parse::<List<f64>>().unwrap();
        assert_eq!(ps, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
    }

    #[test]
    fn mixed_lists() {
        let List(ks) = "3,6:12:6".parse::<List<u32>>().unwrap();
        assert_eq!(ks, vec![3, 6, 12]);
        assert!("1:a:2".parse::<List<u32>>().is_err());
        assert!("0.5:0.1:0.1".parse::<List<f64>>().is_err());
    }
}
