//! Expected population-level tables for the default configuration.
//!
//! Rows follow [`Method::ALL`]; columns follow the default prevalence grid.
//! `NaN` marks an undefined F-measure.

use prevalence::quantify::Method;
use prevalence::shift::ShiftKind;

use crate::config::Output;

#[derive(Debug, Clone, Copy)]
pub struct ReferenceTable {
    pub number: u8,
    pub scenario: ShiftKind,
    pub output: Output,
    pub rows: [[f64; 9]; 5],
}

impl ReferenceTable {
    pub fn row(&self, method: Method) -> &[f64; 9] {
        &self.rows[Method::ALL.iter().position(|m| *m == method).unwrap()]
    }
}

const NAN: f64 = f64::NAN;

pub const REFERENCE_TABLES: [ReferenceTable; 8] = [
    ReferenceTable {
        number: 1,
        scenario: ShiftKind::PriorShift,
        output: Output::Accuracy,
        rows: [
            [0.9609, 0.9397, 0.9170, 0.8591, 0.8413, 0.8591, 0.9170, 0.9397, 0.9609],
            [0.9879, 0.9588, 0.9297, 0.8613, 0.8413, 0.8613, 0.9297, 0.9588, 0.9879],
            [0.9900, 0.9500, 0.9109, 0.8589, 0.8413, 0.8589, 0.9109, 0.9500, 0.9900],
            [0.9905, 0.9595, 0.9299, 0.8613, 0.8413, 0.8613, 0.9299, 0.9595, 0.9905],
            [0.9905, 0.9595, 0.9299, 0.8613, 0.8413, 0.8613, 0.9299, 0.9595, 0.9905],
        ],
    },
    ReferenceTable {
        number: 2,
        scenario: ShiftKind::PriorShift,
        output: Output::FMeasure,
        rows: [
            [0.2274, 0.5035, 0.6106, 0.7649, 0.8413, 0.8994, 0.9536, 0.9679, 0.9799],
            [0.3174, 0.4855, 0.5815, 0.7562, 0.8413, 0.9030, 0.9617, 0.9785, 0.9939],
            [NAN, NAN, 0.2050, 0.7382, 0.8413, 0.9034, 0.9528, 0.9744, 0.9950],
            [0.1697, 0.4404, 0.5681, 0.7563, 0.8413, 0.9030, 0.9619, 0.9790, 0.9952],
            [0.1697, 0.4404, 0.5681, 0.7563, 0.8413, 0.9030, 0.9619, 0.9790, 0.9952],
        ],
    },
    ReferenceTable {
        number: 3,
        scenario: ShiftKind::PriorShift,
        output: Output::Prevalence,
        rows: [
            [0.1655, 0.1928, 0.2269, 0.3635, 0.5000, 0.6365, 0.7731, 0.8072, 0.8345],
            [0.0406, 0.0715, 0.1131, 0.2994, 0.5000, 0.7006, 0.8869, 0.9285, 0.9594],
            [0.0000, 0.0000, 0.0121, 0.2389, 0.5000, 0.7611, 0.9879, 1.0000, 1.0000],
            [0.0100, 0.0500, 0.1000, 0.3000, 0.5000, 0.7000, 0.9000, 0.9500, 0.9900],
            [0.0100, 0.0500, 0.1000, 0.3000, 0.5000, 0.7000, 0.9000, 0.9500, 0.9900],
        ],
    },
    ReferenceTable {
        number: 4,
        scenario: ShiftKind::PriorShift,
        output: Output::RelativeError,
        rows: [
            [15.5482, 2.8558, 1.2692, 0.2115, 0.0000, 0.2115, 1.2692, 2.8558, 15.5482],
            [3.0631, 0.4304, 0.1311, 0.0019, 0.0000, 0.0019, 0.1311, 0.4304, 3.0631],
            [1.0000, 1.0000, 0.8789, 0.2038, 0.0000, 0.2038, 0.8789, 1.0000, 1.0000],
            [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000],
            [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000],
        ],
    },
    ReferenceTable {
        number: 5,
        scenario: ShiftKind::InvariantRatio,
        output: Output::Prevalence,
        rows: [
            [0.1641, 0.1907, 0.2240, 0.3572, 0.4904, 0.6236, 0.7568, 0.7901, 0.8167],
            [0.0359, 0.0653, 0.1049, 0.2855, 0.4853, 0.6890, 0.8794, 0.9217, 0.9531],
            [0.0000, 0.0032, 0.0264, 0.2168, 0.4794, 0.7731, 1.0000, 1.0000, 1.0000],
            [0.0080, 0.0470, 0.0958, 0.2908, 0.4859, 0.6810, 0.8761, 0.9249, 0.9639],
            [0.0100, 0.0500, 0.1000, 0.3000, 0.5000, 0.7000, 0.9000, 0.9500, 0.9900],
        ],
    },
    ReferenceTable {
        number: 6,
        scenario: ShiftKind::InvariantRatio,
        output: Output::RelativeError,
        rows: [
            [15.4091, 2.8146, 1.2402, 0.1907, 0.0192, 0.2547, 1.4324, 3.1988, 17.3302],
            [2.5914, 0.3051, 0.0490, 0.0483, 0.0295, 0.0367, 0.2059, 0.5655, 3.6945],
            [1.0000, 0.9355, 0.7365, 0.2774, 0.0411, 0.2437, 1.0000, 1.0000, 1.0000],
            [0.2038, 0.0604, 0.0425, 0.0305, 0.0281, 0.0633, 0.2389, 0.5024, 2.6102],
            [0.0029, 0.0000, 0.0000, 0.0000, 0.0000, 0.0001, 0.0000, 0.0001, 0.0010],
        ],
    },
    ReferenceTable {
        number: 7,
        scenario: ShiftKind::SqrtRatio,
        output: Output::Prevalence,
        rows: [
            [0.2664, 0.2850, 0.3081, 0.4008, 0.4934, 0.5861, 0.6788, 0.7019, 0.7205],
            [0.1512, 0.1775, 0.2109, 0.3486, 0.4899, 0.6320, 0.7715, 0.8055, 0.8324],
            [0.0000, 0.0398, 0.0914, 0.2886, 0.4859, 0.6875, 0.9020, 0.9681, 1.0000],
            [0.1579, 0.1850, 0.2189, 0.3547, 0.4904, 0.6261, 0.7619, 0.7958, 0.8230],
            [0.1307, 0.1627, 0.2015, 0.3500, 0.4947, 0.6394, 0.7875, 0.8259, 0.8576],
        ],
    },
    ReferenceTable {
        number: 8,
        scenario: ShiftKind::SqrtRatio,
        output: Output::RelativeError,
        rows: [
            [25.6419, 4.6990, 2.0812, 0.3359, 0.0131, 0.3796, 2.2122, 4.9611, 26.9524],
            [14.1179, 2.5494, 1.1085, 0.1618, 0.0201, 0.2268, 1.2851, 2.8896, 15.7629],
            [1.0000, 0.2049, 0.0863, 0.0381, 0.0281, 0.0418, 0.0204, 0.3618, 1.0000],
            [14.7852, 2.7000, 1.1893, 0.1822, 0.0192, 0.2462, 1.3813, 3.0839, 16.7047],
            [12.0686, 2.2549, 1.0149, 0.1667, 0.0105, 0.2019, 1.1254, 2.4814, 13.2365],
        ],
    },
];

pub fn reference_for(scenario: ShiftKind, output: Output) -> Option<&'static ReferenceTable> {
    REFERENCE_TABLES
        .iter()
        .find(|t| t.scenario == scenario && t.output == output)
}
