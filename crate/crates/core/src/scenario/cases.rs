//! The eight fixed task sequences. Each task is a (device type, pattern)
//! pair, written with 1-based labels.

pub const CASE_COUNT: u8 = 8;

pub struct CaseRows {
    pub name: &'static str,
    pub ue: &'static [u8],
    pub pattern: &'static [u8],
}

const STATIONARY_FIRST: [u8; 12] = [1, 1, 3, 3, 2, 2, 4, 4, 6, 6, 5, 5];
const MOVING_FIRST: [u8; 12] = [5, 5, 6, 6, 4, 4, 2, 2, 3, 3, 1, 1];

pub const CASES: [CaseRows; 8] = [
    CaseRows {
        name: "UE 1,2 S->M",
        ue: &[2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1],
        pattern: &STATIONARY_FIRST,
    },
    CaseRows {
        name: "UE 1,2 M->S",
        ue: &[1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2],
        pattern: &MOVING_FIRST,
    },
    CaseRows {
        name: "UE 2,3 S->M",
        ue: &[2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3],
        pattern: &STATIONARY_FIRST,
    },
    CaseRows {
        name: "UE 2,3 M->S",
        ue: &[3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2],
        pattern: &MOVING_FIRST,
    },
    CaseRows {
        name: "UE 1,3 S->M",
        ue: &[3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1],
        pattern: &STATIONARY_FIRST,
    },
    CaseRows {
        name: "UE 1,3 M->S",
        ue: &[1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3],
        pattern: &MOVING_FIRST,
    },
    CaseRows {
        name: "UE 1,2,3 S->M",
        ue: &[2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1],
        pattern: &[1, 1, 1, 3, 3, 3, 2, 2, 2, 4, 4, 4, 6, 6, 6, 5, 5, 5],
    },
    CaseRows {
        name: "UE 1,2,3 M->S",
        ue: &[1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2],
        pattern: &[5, 5, 5, 6, 6, 6, 4, 4, 4, 2, 2, 2, 3, 3, 3, 1, 1, 1],
    },
];
