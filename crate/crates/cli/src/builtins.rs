//! Built-in dilation matrices, exponent families, and default grids.

use serde_json::json;

pub struct BuiltinMatrix {
    pub name: &'static str,
    pub rows: &'static [&'static [f64]],
    pub description: &'static str,
}

pub const MATRICES: &[BuiltinMatrix] = &[
    BuiltinMatrix {
        name: "dyadic-1d",
        rows: &[&[2.0]],
        description: "doubling on the line (b = 2)",
    },
    BuiltinMatrix {
        name: "dyadic-2d",
        rows: &[&[2.0, 0.0], &[0.0, 2.0]],
        description: "isotropic doubling in the plane (b = 4)",
    },
    BuiltinMatrix {
        name: "diag23",
        rows: &[&[2.0, 0.0], &[0.0, 3.0]],
        description: "anisotropic diagonal stretch (b = 6)",
    },
    BuiltinMatrix {
        name: "shear2",
        rows: &[&[2.0, 1.0], &[0.0, 2.0]],
        description: "non-diagonalizable shear (b = 4)",
    },
    BuiltinMatrix {
        name: "rot30x2",
        rows: &[
            &[1.732_050_807_568_877_2, -1.0],
            &[1.0, 1.732_050_807_568_877_2],
        ],
        description: "doubling composed with a 30 degree rotation (b = 4)",
    },
];

pub fn matrix_rows(name: &str) -> Option<Vec<Vec<f64>>> {
    MATRICES
        .iter()
        .find(|m| m.name == name)
        .map(|m| m.rows.iter().map(|r| r.to_vec()).collect())
}

/// The catalog printed by `list-builtins`.
pub fn catalog() -> serde_json::Value {
    json!({
        "matrices": MATRICES.iter().map(|m| json!({
            "name": m.name,
            "rows": m.rows,
            "description": m.description,
        })).collect::<Vec<_>>(),
        "exponent_families": [
            "constant(p0)",
            "log-smooth(p_infty, c)",
            "step(p_low, p_high, threshold)",
        ],
        "default_grids": {
            "freq_shells": [-6, 6],
            "freq_directions": 32,
            "radii": "2^-m for m = 1..12",
            "shell_range": [-12, 8],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contains_the_documented_builtins() {
        let text = serde_json::to_string(&catalog()).unwrap();
        assert!(text.contains("dyadic-2d"));
        assert!(text.contains("diag23"));
        assert!(text.contains("log-smooth(p_infty, c)"));
    }

    #[test]
    fn dyadic_2d_is_twice_the_identity() {
        let rows = matrix_rows("dyadic-2d").unwrap();
        assert_eq!(rows, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }
}
