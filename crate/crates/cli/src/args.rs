//! Parsers for the structured flag values.

use qgraph::{ExtendedReal, HalflineBcF64, PointInteraction};

fn number(s: &str, what: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("{what}: expected a finite number, got '{s}'"))
}

pub fn extended(s: &str) -> Result<ExtendedReal<f64>, String> {
    s.trim()
        .parse::<ExtendedReal<f64>>()
        .map_err(|_| format!("expected a finite number or 'inf', got '{s}'"))
}

/// A boundary condition together with its flag spelling.
#[derive(Debug, Clone, PartialEq)]
pub struct BcArg {
    pub text: String,
    pub bc: HalflineBcF64,
}

pub fn bc_arg(s: &str) -> Result<BcArg, String> {
    Ok(BcArg {
        text: s.trim().to_string(),
        bc: bc(s)?,
    })
}

/// `dirichlet`, `neumann`, `robin:B` or `robin-scaled:N:BETA`.
pub fn bc(s: &str) -> Result<HalflineBcF64, String> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    match parts.as_slice() {
        ["dirichlet"] => Ok(HalflineBcF64::Dirichlet),
        ["neumann"] => Ok(HalflineBcF64::Neumann),
        ["robin", b] => Ok(HalflineBcF64::Robin(number(b, "robin parameter")?)),
        ["robin-scaled", n, beta] => {
            let n = n
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("robin-scaled: bad edge count '{n}'"))?;
            Ok(HalflineBcF64::RobinScaled {
                n,
                beta: number(beta, "robin-scaled beta")?,
            })
        }
        _ => Err(format!(
            "unknown boundary condition '{s}' (dirichlet, neumann, robin:B, robin-scaled:N:BETA)"
        )),
    }
}

/// `POSITION,STRENGTH` with the strength possibly `inf`.
pub fn point(s: &str) -> Result<PointInteraction<f64>, String> {
    let (a, c) = s
        .split_once(',')
        .ok_or_else(|| format!("point: expected POSITION,STRENGTH, got '{s}'"))?;
    PointInteraction::new(number(a, "point position")?, extended(c)?).map_err(|e| e.to_string())
}

/// `L,N`.
pub fn grid(s: &str) -> Result<(f64, usize), String> {
    let (l, n) = s
        .split_once(',')
        .ok_or_else(|| format!("grid: expected L,N, got '{s}'"))?;
    let n = n
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("grid: bad point count '{n}'"))?;
    Ok((number(l, "grid length")?, n))
}

/// Comma-separated numbers given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

/// Comma-separated finite numbers.
pub fn list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|v| number(v, "list entry"))
        .collect::<Result<_, _>>()
        .map(FloatList)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_boundary_conditions() {
        assert_eq!(bc("dirichlet").unwrap(), HalflineBcF64::Dirichlet);
        assert_eq!(bc("robin:-0.5").unwrap(), HalflineBcF64::Robin(-0.5));
        assert_eq!(
            bc("robin-scaled:2:1").unwrap(),
            HalflineBcF64::RobinScaled { n: 2, beta: 1.0 }
        );
        assert!(bc("robin").is_err());
        assert!(bc("robin:nan").is_err());
        assert!(bc("periodic").is_err());
    }

    #[test]
    fn parses_points_and_lists() {
        let p = point("0.5,-2").unwrap();
        assert_eq!(p.position, 0.5);
        assert_eq!(p.strength, ExtendedReal::Finite(-2.0));
        assert!(point("0.5,inf").unwrap().strength.is_infinite());
        assert!(point("0.5").is_err());
        assert_eq!(list("0.1,0.03").unwrap().0, vec![0.1, 0.03]);
        assert_eq!(grid("12,400").unwrap(), (12.0, 400));
        assert!(grid("12").is_err());
    }
}
