//! Transcribed generators. `{D}` stands for the generator's denominator,
//! written exactly as it appears in the printed formulas; each one is checked
//! against a rational multiple of the matching invariant divisor.

use crate::algebra::{parse_poly, parse_ratfunc, MultiPoly};
use crate::divisors::divisor_table;
use crate::error::{Error, Result};
use crate::systems::{HamiltonianSystem, SystemKind};

use super::map::{BirationalMap, ParamAction};

pub struct GeneratorSpec {
    pub name: &'static str,
    /// Denominator text, `None` for the diagram automorphism.
    pub denominator: Option<&'static str>,
    /// (variable, image) with `{D}` placeholders; unlisted variables are fixed.
    pub images: &'static [(&'static str, &'static str)],
    /// Row i gives the new alpha_i in terms of the old parameters.
    pub params: &'static [&'static [i64]],
}

pub const D3_GENERATORS: &[GeneratorSpec] = &[
    GeneratorSpec {
        name: "s0",
        denominator: Some("4*p1 + q2^2"),
        images: &[
            ("q1", "q1 + 4*alpha0/({D})"),
            ("p2", "p2 - 2*alpha0*q2/({D})"),
        ],
        params: &[&[-1, 0, 0], &[2, 1, 0], &[0, 0, 1]],
    },
    GeneratorSpec {
        name: "s1",
        denominator: Some("p2"),
        images: &[("q2", "q2 + alpha1/({D})")],
        params: &[&[1, 1, 0], &[0, -1, 0], &[0, 1, 1]],
    },
    GeneratorSpec {
        name: "s2",
        denominator: Some("4*p1 + 8*p2 + 4*q1*q2 - q2^2 + 4*t"),
        images: &[
            ("q1", "q1 + 4*alpha2/({D})"),
            ("p1", "p1 - 4*alpha2*q2/({D}) - 16*alpha2^2/({D})^2"),
            ("q2", "q2 + 8*alpha2/({D})"),
            ("p2", "p2 - 2*alpha2*(2*q1 - q2)/({D})"),
        ],
        params: &[&[1, 0, 0], &[0, 1, 2], &[0, 0, -1]],
    },
];

const D5_S2_DEN: &str = "2*p1 + 4*p2 + 4*p3 + 2*p4 + 2*q1*q2 - q2*q3 + 2*q3*q4 + 4*t";

pub const D5_GENERATORS: &[GeneratorSpec] = &[
    GeneratorSpec {
        name: "s0",
        denominator: Some("4*p1 + q2^2"),
        images: &[
            ("q1", "q1 + 4*alpha0/({D})"),
            ("p2", "p2 - 2*alpha0*q2/({D})"),
        ],
        params: &[
            &[-1, 0, 0, 0, 0],
            &[2, 1, 0, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 1],
        ],
    },
    GeneratorSpec {
        name: "s1",
        denominator: Some("p2"),
        images: &[("q2", "q2 + alpha1/({D})")],
        params: &[
            &[1, 1, 0, 0, 0],
            &[0, -1, 0, 0, 0],
            &[0, 1, 1, 0, 0],
            &[0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 1],
        ],
    },
    GeneratorSpec {
        name: "s2",
        denominator: Some(D5_S2_DEN),
        images: &[
            ("q1", "q1 + 2*alpha2/({D})"),
            ("p1", "p1 - 2*alpha2*q2/({D}) - 4*alpha2^2/({D})^2"),
            ("q2", "q2 + 4*alpha2/({D})"),
            ("p2", "p2 - alpha2*(2*q1 - q3)/({D})"),
            ("q3", "q3 + 4*alpha2/({D})"),
            ("p3", "p3 - alpha2*(2*q4 - q2)/({D})"),
            ("q4", "q4 + 2*alpha2/({D})"),
            ("p4", "p4 - 2*alpha2*q3/({D}) - 4*alpha2^2/({D})^2"),
        ],
        params: &[
            &[1, 0, 0, 0, 0],
            &[0, 1, 1, 0, 0],
            &[0, 0, -1, 0, 0],
            &[0, 0, 1, 1, 0],
            &[0, 0, 0, 0, 1],
        ],
    },
    // The printed formula moves p3 rather than q3; the reflection generated by
    // f3 = p3 moves q3 (see `printed_variant`).
    GeneratorSpec {
        name: "s3",
        denominator: Some("p3"),
        images: &[("q3", "q3 + alpha3/({D})")],
        params: &[
            &[1, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0],
            &[0, 0, 1, 1, 0],
            &[0, 0, 0, -1, 0],
            &[0, 0, 0, 1, 1],
        ],
    },
    // The printed formula puts the 4*alpha4/({D}) shift on p4; the reflection
    // generated by f4 = p4 + q3^2/4 puts it on q4.
    GeneratorSpec {
        name: "s4",
        denominator: Some("4*p4 + q3^2"),
        images: &[
            ("p3", "p3 - 2*alpha4*q3/({D})"),
            ("q4", "q4 + 4*alpha4/({D})"),
        ],
        params: &[
            &[1, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, 1, 2],
            &[0, 0, 0, 0, -1],
        ],
    },
    GeneratorSpec {
        name: "pi",
        denominator: None,
        images: &[
            ("q1", "q4"),
            ("p1", "p4"),
            ("q2", "q3"),
            ("p2", "p3"),
            ("q3", "q2"),
            ("p3", "p2"),
            ("q4", "q1"),
            ("p4", "p1"),
        ],
        params: &[
            &[0, 0, 0, 0, 1],
            &[0, 0, 0, 1, 0],
            &[0, 0, 1, 0, 0],
            &[0, 1, 0, 0, 0],
            &[1, 0, 0, 0, 0],
        ],
    },
];

/// The D5 generators s3 and s4 exactly as printed. Kept for the regression
/// tests showing that they are not symmetries of the system.
pub const D5_PRINTED_VARIANTS: &[GeneratorSpec] = &[
    GeneratorSpec {
        name: "s3",
        denominator: Some("p3"),
        images: &[("p3", "p3 + alpha3/({D})")],
        params: D5_GENERATORS[3].params,
    },
    GeneratorSpec {
        name: "s4",
        denominator: Some("4*p4 + q3^2"),
        images: &[
            ("p3", "p3 - 2*alpha4*q3/({D})"),
            ("p4", "p4 + 4*alpha4/({D})"),
        ],
        params: D5_GENERATORS[4].params,
    },
];

pub fn generator_specs(kind: SystemKind) -> &'static [GeneratorSpec] {
    match kind {
        SystemKind::D3 => D3_GENERATORS,
        SystemKind::D5 => D5_GENERATORS,
    }
}

pub fn generator_names(kind: SystemKind) -> Vec<&'static str> {
    generator_specs(kind).iter().map(|g| g.name).collect()
}

fn find_spec<'a>(specs: &'a [GeneratorSpec], name: &str) -> Result<&'a GeneratorSpec> {
    specs
        .iter()
        .find(|g| g.name == name)
        .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
}

fn build(sys: &HamiltonianSystem, spec: &GeneratorSpec) -> Result<BirationalMap> {
    let reg = &sys.registry;
    let mut map = BirationalMap::identity(reg);
    let dynamical = reg.dynamical();
    for (var, text) in spec.images {
        let expanded = match spec.denominator {
            Some(d) => text.replace("{D}", d),
            None => text.to_string(),
        };
        let idx = reg.index_of(var)?;
        let k = dynamical
            .iter()
            .position(|&v| v == idx)
            .expect("dynamical variable");
        map.images[k] = parse_ratfunc(reg, &expanded)?;
    }
    map.params = ParamAction::new(spec.name, spec.params.iter().map(|r| r.to_vec()).collect());
    map.label = spec.name.to_string();
    map.word = vec![spec.name.to_string()];
    Ok(map)
}

/// The generator `name` of the system's Backlund group.
pub fn explicit_generator(sys: &HamiltonianSystem, name: &str) -> Result<BirationalMap> {
    let kind = sys
        .kind
        .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
    build(sys, find_spec(generator_specs(kind), name)?)
}

/// The literal printed form of D5's s3 or s4.
pub fn printed_variant(sys: &HamiltonianSystem, name: &str) -> Result<BirationalMap> {
    if sys.kind != Some(SystemKind::D5) {
        return Err(Error::UnknownGenerator(name.to_string()));
    }
    let mut m = build(sys, find_spec(D5_PRINTED_VARIANTS, name)?)?;
    m.label = format!("{name}-as-printed");
    Ok(m)
}

/// Checks that the transcribed denominator of `name` is a rational multiple
/// of the matching invariant divisor; returns the multiple.
pub fn check_transcription(
    sys: &HamiltonianSystem,
    name: &str,
) -> Result<Option<num_rational::BigRational>> {
    let kind = sys
        .kind
        .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
    let spec = find_spec(generator_specs(kind), name)?;
    let Some(den_text) = spec.denominator else {
        return Ok(None);
    };
    let den: MultiPoly = parse_poly(&sys.registry, den_text)?;
    let i: usize = name[1..]
        .parse()
        .map_err(|_| Error::UnknownGenerator(name.to_string()))?;
    let f = &divisor_table(sys)[i].divisor;
    let (lm, lc) = f.leading_term().expect("nonzero divisor");
    let c = den.coeff(lm) / lc;
    if den != f.scale(&c) {
        return Err(Error::Verification(format!(
            "denominator of {name} is not a multiple of f{i}: {den} vs {f}"
        )));
    }
    Ok(Some(c))
}
