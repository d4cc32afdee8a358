//! Small shifts and potentials used across tests, examples and `verify-paper`.

/// Markov shift on {1,2,3} where 1 and 3 never touch.
pub const THREE_SYMBOL_SHIFT: &str = "\
alphabet 1 2 3
type adjacency
row 1 1 0
row 1 1 1
row 0 1 1
";

/// Indicator of each symbol of [`THREE_SYMBOL_SHIFT`].
pub const THREE_SYMBOL_INDICATORS: &str = "\
order 0
value 1 : 1 0 0
value 2 : 0 1 0
value 3 : 0 0 1
";

/// First two indicators only; the rotation set is then a full-dimensional triangle.
pub const THREE_SYMBOL_REDUCED: &str = "\
order 0
value 1 : 1 0
value 2 : 0 1
value 3 : 0 0
";

/// Frequency of symbol 2 in [`THREE_SYMBOL_SHIFT`].
pub const THREE_SYMBOL_FREQ_2: &str = "\
order 0
value 2 : 1
default : 0
";

pub const FULL_TWO_SHIFT: &str = "\
alphabet 0 1
type adjacency
row 1 1
row 1 1
";

pub const GOLDEN_MEAN: &str = "\
alphabet 0 1
type forbidden
forbid 1 1
";

/// Even shift: runs of 0 between two 1s have even length.
pub const EVEN_SHIFT: &str = "\
alphabet 0 1
type graph
states 2
edge 0 0 1
edge 0 1 0
edge 1 0 0
";

/// First coordinate on the alphabet {0,1}.
pub const X0: &str = "\
order 0
value 0 : 0
value 1 : 1
";

/// Counts occurrences of the block `0 1`.
pub const FREQ_01: &str = "\
order 1
value 0 1 : 1
default : 0
";

pub const ZERO: &str = "\
order 0
default : 0
";
