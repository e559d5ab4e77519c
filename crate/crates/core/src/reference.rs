//! Published reference problems: listed designs, their dye colorings and
//! reported efficiencies, optimal-measure tables, and variance profiles.
//! These drive the `reproduce` command and the acceptance suite.

use crate::factorial::{FactorialSpec, Parametrization};
use Parametrization::{AllToNext, Baseline};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceExample {
    pub id: &'static str,
    pub title: &'static str,
    pub levels: &'static [usize],
    pub params: &'static [Parametrization],
    pub weights: &'static [f64],
    pub slides: usize,
    /// Slides as listed, in "(11, 01)" notation.
    pub listed: &'static str,
    /// The same slides with a nearly symmetric coloring, "(R11, G01)".
    pub colored: &'static str,
    pub eff: f64,
    pub eff_dye: f64,
    /// Leading elements of the rounding catalog G.
    pub g_prefix: &'static [usize],
}

impl ReferenceExample {
    pub fn spec(&self) -> FactorialSpec {
        FactorialSpec::new(self.levels.to_vec(), self.params.to_vec()).expect("reference specs are valid")
    }
}

pub const EXAMPLES: &[ReferenceExample] = &[
    ReferenceExample {
        id: "ex2-baseline",
        title: "3x3 baseline, w = (1, 1), 14 slides",
        levels: &[3, 3],
        params: &[Baseline, Baseline],
        weights: &[1.0, 1.0],
        slides: 14,
        listed: "(01, 00), (02, 00), (10, 00), (10, 00), (20, 00), (20, 00), (11, 01), (21, 01),\
        (12, 02), (22, 02), (11, 10), (12, 10), (21, 20), (22, 20)",
        colored: "(R01, G00), (G02, R00), (R10, G00), (G10, R00), (R20, G00), (G20, R00), (R11, G01),\
        (G21, R01), (G12, R02), (R22, G02), (G11, R10), (R12, G10), (R21, G20), (G22, R20)",
        eff: 0.9591,
        eff_dye: 0.9481,
        g_prefix: &[12, 16, 18, 22, 30],
    },
    ReferenceExample {
        id: "ex3-baseline",
        title: "3x4 baseline, w = (1, 2), 18 slides",
        levels: &[3, 4],
        params: &[Baseline, Baseline],
        weights: &[1.0, 2.0],
        slides: 18,
        listed: "(10, 00), (20, 00), (20, 00), (01, 00), (02, 00), (03, 00), (11, 01), (21, 01),\
        (12, 02), (22, 02), (13, 03), (23, 03), (11, 10), (12, 10), (13, 10), (21, 20),\
        (22, 20), (23, 20)",
        colored: "(G10, R00), (R20, G00), (G20, R00), (R01, G00), (G02, R00), (R03, G00), (R11, G01),\
        (G21, R01), (G12, R02), (R22, G02), (R13, G03), (G23, R03), (G11, R10), (R12, G10),\
        (G13, R10), (R21, G20), (G22, R20), (R23, G20)",
        eff: 0.9724,
        eff_dye: 0.9649,
        g_prefix: &[11, 17, 19, 22, 28],
    },
    ReferenceExample {
        id: "ex4-baseline",
        title: "2x3x3 baseline, w = (1, 2, 2), 29 slides",
        levels: &[2, 3, 3],
        params: &[Baseline, Baseline, Baseline],
        weights: &[1.0, 2.0, 2.0],
        slides: 29,
        listed: "(100, 000), (100, 000), (001, 000), (002, 000), (010, 000), (020, 000), (011, 001),\
        (021, 001), (101, 001), (012, 002), (022, 002), (102, 002), (011, 010), (012, 010),\
        (110, 010), (111, 011), (021, 020), (022, 020), (120, 020), (121, 021), (122, 022),\
        (101, 100), (102, 100), (110, 100), (111, 101), (112, 102), (112, 110), (121, 120),\
        (122, 120)",
        colored: "(R100, G000), (G100, R000), (R001, G000), (G002, R000), (R010, G000), (G020, R000),\
        (R011, G001), (G021, R001), (R101, G001), (G012, R002), (R022, G002), (G102, R002),\
        (G011, R010), (R012, G010), (R110, G010), (R111, G011), (R021, G020), (G022, R020),\
        (G120, R020), (R121, G021), (G122, R022), (G101, R100), (R102, G100), (G110, R100),\
        (G111, R101), (R112, G102), (G112, R110), (G121, R120), (R122, G120)",
        eff: 0.9366,
        eff_dye: 0.9311,
        g_prefix: &[25, 26, 34, 38, 42],
    },
    ReferenceExample {
        id: "ex5-baseline",
        title: "2x2x4 baseline, w = (1, 1, 1), 30 slides",
        levels: &[2, 2, 4],
        params: &[Baseline, Baseline, Baseline],
        weights: &[1.0, 1.0, 1.0],
        slides: 30,
        listed: "(001, 000), (001, 000), (002, 000), (002, 000), (003, 000), (003, 000), (010, 000),\
        (100, 000), (110, 010), (110, 010), (110, 100), (110, 100), (011, 001), (101, 001),\
        (012, 002), (102, 002), (013, 003), (103, 003), (011, 010), (012, 010), (013, 010),\
        (111, 011), (112, 012), (113, 013), (101, 100), (102, 100), (103, 100), (111, 101),\
        (112, 102), (113, 103)",
        colored: "(R001, G000), (G001, R000), (R002, G000), (G002, R000), (R003, G000), (G003, R000),\
        (R010, G000), (G100, R000), (R110, G010), (G110, R010), (R110, G100), (G110, R100),\
        (R011, G001), (G101, R001), (G012, R002), (R102, G002), (R013, G003), (G103, R003),\
        (R011, G010), (G012, R010), (R013, G010), (R111, G011), (G112, R012), (R113, G013),\
        (G101, R100), (R102, G100), (G103, R100), (G111, R101), (R112, G102), (G113, R103)",
        eff: 0.9624,
        eff_dye: 0.9602,
        g_prefix: &[25, 27, 30, 35, 37],
    },
    ReferenceExample {
        id: "ex6",
        title: "2^4, w = (1, 1/2, 1/3, 1/4), 27 slides",
        levels: &[2, 2, 2, 2],
        params: &[Baseline, Baseline, Baseline, Baseline],
        weights: &[1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0],
        slides: 27,
        listed: "(0001, 0000), (0001, 0000), (0010, 0000), (0010, 0000), (0100, 0000), (1000, 0000),\
        (1000, 0000), (0011, 0001), (0101, 0001), (1001, 0001), (0011, 0010), (0110, 0010),\
        (1010, 0010), (1011, 0011), (0101, 0100), (0110, 0100), (1100, 0100), (0111, 0101),\
        (0111, 0110), (1001, 1000), (1010, 1000), (1100, 1000), (1101, 1001), (1110, 1010),\
        (1111, 1011), (1101, 1100), (1111, 1110)",
        colored: "(R0001, G0000), (G0001, R0000), (R0010, G0000), (G0010, R0000), (R0100, G0000),\
        (G1000, R0000), (R1000, G0000), (R0011, G0001), (G0101, R0001), (R1001, G0001),\
        (G0011, R0010), (R0110, G0010), (R1010, G0010), (G1011, R0011), (R0101, G0100),\
        (G0110, R0100), (R1100, G0100), (R0111, G0101), (G0111, R0110), (R1001, G1000),\
        (R1010, G1000), (G1100, R1000), (R1101, G1001), (R1110, G1010), (G1111, R1011),\
        (G1101, R1100), (R1111, G1110)",
        eff: 0.9160,
        eff_dye: 0.9091,
        g_prefix: &[52, 56, 60, 72],
    },
    ReferenceExample {
        id: "ex2-allnext",
        title: "3x3 all-to-next, w = (1, 1), 14 slides",
        levels: &[3, 3],
        params: &[AllToNext, AllToNext],
        weights: &[1.0, 1.0],
        slides: 14,
        listed: "(20, 10), (20, 10), (01, 00), (02, 00), (10, 00), (02, 01), (11, 01), (12, 02),\
        (11, 10), (12, 11), (21, 11), (22, 12), (21, 20), (22, 21)",
        colored: "(R20, G10), (G20, R10), (R01, G00), (G02, R00), (R10, G00), (R02, G01), (R11, G01),\
        (G12, R02), (R11, G10), (R12, G11), (R21, G11), (G22, R12), (R21, G20), (R22, G21)",
        eff: 0.9481,
        eff_dye: 0.9344,
        g_prefix: &[10, 12, 14, 16, 18],
    },
    ReferenceExample {
        id: "ex3-allnext",
        title: "3x4 all-to-next, w = (1, 2), 18 slides",
        levels: &[3, 4],
        params: &[AllToNext, AllToNext],
        weights: &[1.0, 2.0],
        slides: 18,
        listed: "(01, 00), (10, 00), (02, 01), (11, 01), (03, 02), (12, 02), (13, 03), (11, 10),\
        (20, 10), (12, 11), (21, 11), (13, 12), (22, 12), (23, 13), (21, 20), (22, 21),\
        (23, 22), (20, 00)",
        colored: "(G01, R00), (G10, R00), (R02, G01), (G11, R01), (G03, R02), (R12, G02), (G13, R03),\
        (R11, G10), (G20, R10), (G12, R11), (R21, G11), (R13, G12), (G22, R12), (R23, G13),\
        (G21, R20), (R22, G21), (G23, R22), (R20, G00)",
        eff: 0.9673,
        eff_dye: 0.9554,
        g_prefix: &[11, 12, 13, 14, 15, 16, 17, 18, 19, 20],
    },
    ReferenceExample {
        id: "ex4-allnext",
        title: "2x3x3 all-to-next, w = (1, 2, 2), 29 slides",
        levels: &[2, 3, 3],
        params: &[AllToNext, AllToNext, AllToNext],
        weights: &[1.0, 2.0, 2.0],
        slides: 29,
        listed: "(001, 000), (010, 000), (100, 000), (002, 001), (011, 001), (101, 001), (012, 002),\
        (102, 002), (011, 010), (020, 010), (110, 010), (012, 011), (021, 011), (111, 011),\
        (022, 012), (112, 012), (021, 020), (120, 020), (022, 021), (121, 021), (101, 100),\
        (110, 100), (102, 101), (120, 110), (112, 111), (121, 111), (122, 112), (122, 121),\
        (111, 101)",
        colored: "(G001, R000), (R010, G000), (R100, G000), (R002, G001), (G011, R001), (G101, R001),\
        (R012, G002), (R102, G002), (G011, R010), (R020, G010), (R110, G010), (G012, R011),\
        (G021, R011), (R111, G011), (R022, G012), (G112, R012), (R021, G020), (R120, G020),\
        (G022, R021), (R121, G021), (R101, G100), (G110, R100), (G102, R101), (G120, R110),\
        (R112, G111), (G121, R111), (R122, G112), (G122, R121), (G111, R101)",
        eff: 0.9467,
        eff_dye: 0.9431,
        g_prefix: &[28, 29, 30, 32, 34],
    },
    ReferenceExample {
        id: "ex5-allnext",
        title: "2x2x4 all-to-next, w = (1, 1, 1), 30 slides",
        levels: &[2, 2, 4],
        params: &[AllToNext, AllToNext, AllToNext],
        weights: &[1.0, 1.0, 1.0],
        slides: 30,
        listed: "(010, 000), (010, 000), (100, 000), (100, 000), (002, 001), (002, 001), (003, 002),\
        (003, 002), (001, 000), (011, 001), (101, 001), (012, 002), (102, 002), (013, 003),\
        (103, 003), (011, 010), (110, 010), (012, 011), (111, 011), (013, 012), (112, 012),\
        (113, 013), (101, 100), (110, 100), (102, 101), (111, 101), (103, 102), (112, 102),\
        (113, 103), (111, 110)",
        colored: "(R010, G000), (G010, R000), (R100, G000), (G100, R000), (R002, G001), (G002, R001),\
        (R003, G002), (G003, R002), (R001, G000), (R011, G001), (G101, R001), (G012, R002),\
        (R102, G002), (G013, R003), (R103, G003), (R011, G010), (G110, R010), (R012, G011),\
        (R111, G011), (G013, R012), (R112, G012), (G113, R013), (R101, G100), (G110, R100),\
        (G102, R101), (R111, G101), (R103, G102), (G112, R102), (R113, G103), (G111, R110)",
        eff: 0.9634,
        eff_dye: 0.9597,
        g_prefix: &[24, 26, 28, 29, 30, 31, 32, 33],
    },
    ReferenceExample {
        id: "ex3-hybrid",
        title: "3x4 hybrid (baseline 3-level, all-to-next 4-level), w = (1, 2), 18 slides",
        levels: &[3, 4],
        params: &[Baseline, AllToNext],
        weights: &[1.0, 2.0],
        slides: 18,
        listed: "(01, 00), (01, 00), (10, 00), (20, 00), (02, 01), (11, 01), (21, 01), (03, 02),\
        (12, 02), (22, 02), (13, 03), (23, 03), (11, 10), (12, 11), (13, 12), (21, 20),\
        (22, 21), (23, 22)",
        colored: "(R01, G00), (G01, R00), (G10, R00), (R20, G00), (G02, R01), (R11, G01), (G21, R01),\
        (G03, R02), (R12, G02), (G22, R02), (G13, R03), (R23, G03), (G11, R10), (R12, G11),\
        (R13, G12), (R21, G20), (G22, R21), (G23, R22)",
        eff: 0.9686,
        eff_dye: 0.9577,
        g_prefix: &[11, 13, 15, 17, 18, 20, 21],
    },
];

pub fn example(id: &str) -> Option<&'static ReferenceExample> {
    EXAMPLES.iter().find(|e| e.id == id)
}

/// A group of pairs sharing one optimal mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassCategory {
    pub name: &'static str,
    pub pairs: &'static str,
    pub mass: f64,
}

/// Optimal measure for 3x3 baseline, w = (1, 1). Unlisted pairs carry 0.
pub const MEASURE_3X3_BASELINE: &[MassCategory] = &[
    MassCategory {
        name: "i",
        pairs: "(01, 00), (02, 00), (10, 00), (20, 00)",
        mass: 0.1054,
    },
    MassCategory {
        name: "ii",
        pairs: "(11, 01), (21, 01), (12, 02), (22, 02), (11, 10), (12, 10), (21, 20), (22, 20)",
        mass: 0.0607,
    },
    MassCategory {
        name: "iii",
        pairs: "(02, 01), (20, 10)",
        mass: 0.0242,
    },
    MassCategory {
        name: "iv",
        pairs: "(12, 11), (21, 11), (22, 12), (22, 21)",
        mass: 0.0111,
    },
];

/// Optimal measure for 3x3 all-to-next, w = (1, 1). Unlisted pairs carry 0.
pub const MEASURE_3X3_ALL_TO_NEXT: &[MassCategory] = &[
    MassCategory {
        name: "i",
        pairs: "(02, 01), (20, 10)",
        mass: 0.1118,
    },
    MassCategory {
        name: "ii",
        pairs: "(01, 00), (10, 00)",
        mass: 0.0991,
    },
    MassCategory {
        name: "iii",
        pairs: "(12, 11), (21, 11)",
        mass: 0.0789,
    },
    MassCategory {
        name: "iv",
        pairs: "(11, 01), (11, 10)",
        mass: 0.0632,
    },
    MassCategory {
        name: "v",
        pairs: "(22, 12), (22, 21)",
        mass: 0.0604,
    },
    MassCategory {
        name: "vi",
        pairs: "(12, 02), (21, 20)",
        mass: 0.0489,
    },
    MassCategory {
        name: "vii",
        pairs: "(02, 00), (20, 00)",
        mass: 0.0249,
    },
    MassCategory {
        name: "viii",
        pairs: "(21, 01), (12, 10)",
        mass: 0.0065,
    },
    MassCategory {
        name: "ix",
        pairs: "(22, 02), (22, 20)",
        mass: 0.0063,
    },
];

/// Biological-variance patterns (γ̃² in lexicographic treatment order) with
/// the reported Eff♯ of a listed design under each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStudy {
    pub example_id: &'static str,
    pub patterns: [&'static [f64]; 3],
    pub eff_sharp: [f64; 3],
}

const EX3_PATTERNS: [&[f64]; 3] = [
    &[2.0, 2.5, 2.5, 3.0, 2.5, 3.0, 3.0, 4.0, 3.0, 3.5, 4.0, 4.5],
    &[2.0, 3.0, 3.0, 4.0, 3.0, 4.0, 5.0, 6.0, 5.0, 6.0, 7.0, 8.0],
    &[8.0, 7.0, 6.0, 5.0, 6.0, 5.0, 4.0, 3.0, 4.0, 3.0, 3.0, 2.0],
];

const EX5_PATTERNS: [&[f64]; 3] = [
    &[
        2.0, 3.0, 4.0, 5.0, 3.0, 4.0, 4.0, 6.0, 4.0, 5.0, 6.0, 7.0, 5.0, 6.0, 7.0, 8.0,
    ],
    &[
        3.0, 4.0, 5.0, 7.0, 4.0, 6.0, 7.0, 8.0, 5.0, 7.0, 8.0, 9.0, 6.0, 8.0, 10.0, 11.0,
    ],
    &[
        11.0, 10.0, 8.0, 6.0, 9.0, 8.0, 7.0, 5.0, 8.0, 7.0, 6.0, 4.0, 7.0, 5.0, 4.0, 3.0,
    ],
];

pub const PROFILE_STUDIES: &[ProfileStudy] = &[
    ProfileStudy {
        example_id: "ex3-baseline",
        patterns: EX3_PATTERNS,
        eff_sharp: [0.9734, 0.9647, 0.9375],
    },
    ProfileStudy {
        example_id: "ex3-allnext",
        patterns: EX3_PATTERNS,
        eff_sharp: [0.9692, 0.9625, 0.9308],
    },
    ProfileStudy {
        example_id: "ex5-baseline",
        patterns: EX5_PATTERNS,
        eff_sharp: [0.9544, 0.9536, 0.9360],
    },
    ProfileStudy {
        example_id: "ex5-allnext",
        patterns: EX5_PATTERNS,
        eff_sharp: [0.9483, 0.9449, 0.9426],
    },
];

/// Catalog gap: for 3x5 baseline, w = (1, 2), these multipliers round to
/// 26 and 34 slides, and refining to 28 slides gives the efficiencies below.
pub const GAP_3X5: GapCase = GapCase {
    levels: &[3, 5],
    weights: &[1.0, 2.0],
    multipliers: [(35.1305, 26), (35.1306, 34)],
    target: 28,
    step_up_eff: 0.9335,
    step_down_eff: 0.9465,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCase {
    pub levels: &'static [usize],
    pub weights: &'static [f64],
    pub multipliers: [(f64, usize); 2],
    pub target: usize,
    pub step_up_eff: f64,
    pub step_down_eff: f64,
}

/// 2^4 with w = (1, 2, 2, 1): d(28) is singular, 48 is the smallest
/// nonsingular catalog size, and stepping d(48) down to 28 slides gives this.
pub const SINGULAR_2X4: SingularCase = SingularCase {
    weights: &[1.0, 2.0, 2.0, 1.0],
    singular_g: 28,
    first_nonsingular_g: 48,
    step_down_eff: 0.9264,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularCase {
    pub weights: &'static [f64],
    pub singular_g: usize,
    pub first_nonsingular_g: usize,
    pub step_down_eff: f64,
}

/// 3x3 baseline, w = (1, 1), 22 slides: d(22) itself versus stepping up from
/// d(18) and down from d(30).
pub const REFINE_3X3: RefineCase = RefineCase {
    target: 22,
    direct_eff: 0.8974,
    from_below: (18, 0.9567),
    from_above: (30, 0.9608),
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineCase {
    pub target: usize,
    pub direct_eff: f64,
    pub from_below: (usize, f64),
    pub from_above: (usize, f64),
}
