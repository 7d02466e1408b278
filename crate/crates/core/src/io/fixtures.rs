//! Values printed in the source tables, kept as the printed decimal strings.

use crate::boundary::BranchKind;

/// An exact rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// The published seed on the odd/even curve, in quarter-period
/// coordinates `(τ, a, b)`.
pub const P0: [Rational; 3] = [
    Rational { num: 13366894627923, den: 5000000000000 },
    Rational { num: 43170475352787, den: 10000000000000 },
    Rational { num: 1490359743, den: 1000000000 },
];

pub fn p0() -> [f64; 3] {
    [P0[0].value(), P0[1].value(), P0[2].value()]
}

/// A named point in full-period coordinates `(T, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedPoint {
    pub name: &'static str,
    pub coords: [&'static str; 3],
    pub kind: BranchKind,
}

impl NamedPoint {
    pub fn values(&self) -> [f64; 3] {
        self.coords.map(parse)
    }
}

pub const P1: NamedPoint = NamedPoint {
    name: "P1",
    coords: ["5.0063", "0.109392", "1.16473"],
    kind: BranchKind::Odd,
};
pub const P2: NamedPoint = NamedPoint {
    name: "P2",
    coords: ["12.7012", "0.0437163", "3.19541"],
    kind: BranchKind::OddEven,
};
pub const P3: NamedPoint = NamedPoint {
    name: "P3",
    coords: ["9.9472", "4.73605", "0.2"],
    kind: BranchKind::OddEven,
};
pub const B: NamedPoint = NamedPoint {
    name: "B",
    coords: ["14.607249047056753", "2.081806260749908", "3.194934273913219"],
    kind: BranchKind::OddEven,
};

pub const NAMED_POINTS: [NamedPoint; 4] = [P1, P2, P3, B];

/// The 200th predictor point and the first corrected pillar of the worked
/// continuation example from `P0`, in quarter-period coordinates.
pub const WORKED_Q200: [&str; 3] = ["2.7219062659312807", "4.212655007080421", "1.6538674269975053"];
pub const WORKED_Q1: [&str; 3] = ["2.72191575576588", "4.212633490447383", "1.6538497779324066"];

/// Printed minimum distances: near `P2` at a quarter period and near `P1`
/// at half a period.
pub const P2_QUARTER_R: &str = "0.0547972";
pub const P1_HALF_R: &str = "0.0369262";
/// Printed extreme height of the centre body near `P2`.
pub const P2_F_MAX: &str = "6.01695";

/// One row of the published periodic-orbit tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    /// Table number, 1 to 5.
    pub table: u8,
    /// `(row, column)` of the picture in the figure grid.
    pub location: (u8, u8),
    pub period: &'static str,
    pub a: &'static str,
    pub b: &'static str,
    /// `Θ(T) = p π / q` as printed.
    pub p: i64,
    pub q: i64,
    pub kind: BranchKind,
    /// Rows whose printed angle is known to be inconsistent with their
    /// neighbours; reported but not counted as failures.
    pub advisory: bool,
}

impl TableRow {
    pub fn coords(&self) -> [f64; 3] {
        [parse(self.period), parse(self.a), parse(self.b)]
    }

    pub fn theta(&self) -> f64 {
        self.p as f64 * std::f64::consts::PI / self.q as f64
    }

    pub fn label(&self) -> String {
        format!("table {} ({},{})", self.table, self.location.0, self.location.1)
    }
}

#[allow(clippy::too_many_arguments)]
const fn row(
    table: u8,
    location: (u8, u8),
    period: &'static str,
    a: &'static str,
    b: &'static str,
    p: i64,
    q: i64,
    kind: BranchKind,
    advisory: bool,
) -> TableRow {
    TableRow { table, location, period, a, b, p, q, kind, advisory }
}

pub const TABLES: [TableRow; 45] = [
    row(1, (1, 1), "7.464725167070125", "1.332130235206886", "2.39131806234605", 14, 9, BranchKind::Odd, false),
    row(1, (1, 2), "6.692611549615348", "1.1189865713077587", "2.178542324667063", 11, 7, BranchKind::Odd, false),
    row(1, (1, 3), "6.156645197408822", "0.9203809141218081", "1.9818897189116862", 8, 5, BranchKind::Odd, false),
    row(1, (2, 1), "5.758992220584509", "0.72863210825991", "1.791870916952545", 13, 8, BranchKind::Odd, false),
    row(1, (2, 2), "5.454531817007846", "0.5397530375918577", "1.6029431700479464", 5, 3, BranchKind::Odd, false),
    row(1, (2, 3), "5.32949878269853", "0.4457220498597047", "1.5077112808284203", 12, 7, BranchKind::Odd, false),
    row(1, (3, 1), "5.220379172126002", "0.35201283725645105", "1.411839280497764", 7, 4, BranchKind::Odd, false),
    row(1, (3, 2), "5.1264630045948305", "0.25902392732426605", "1.3159094056731593", 16, 9, BranchKind::Odd, false),
    row(1, (3, 3), "5.096931182326409", "0.22679159236240487", "1.2822928944673215", 9, 5, BranchKind::Odd, false),
    row(2, (1, 1), "10.694782129146047", "4.3162773916465715", "1.4916623030663265", 17, 8, BranchKind::OddEven, false),
    row(2, (1, 2), "10.900907564917922", "4.205530359018152", "1.6642665366638942", 15, 7, BranchKind::OddEven, false),
    row(2, (1, 3), "11.251546754899636", "4.020933846016405", "1.9098147447184282", 13, 6, BranchKind::OddEven, false),
    row(2, (2, 1), "11.546587626864484", "3.8684643701482133", "2.0840362602898437", 11, 5, BranchKind::OddEven, false),
    row(2, (2, 2), "12.005866456188725", "3.6348152391561275", "2.314439960284758", 9, 4, BranchKind::OddEven, false),
    row(2, (2, 3), "12.482298481771874", "3.3941653076488447", "2.5161535540867117", 16, 7, BranchKind::OddEven, false),
    row(2, (3, 1), "12.805950195048542", "3.229502929775678", "2.6373059506494907", 7, 3, BranchKind::OddEven, false),
    row(2, (3, 2), "13.037980888481863", "3.10968118474065", "2.717938296845948", 12, 5, BranchKind::OddEven, false),
    row(2, (3, 3), "13.211458502729283", "3.01851140163578", "2.775360523910528", 17, 7, BranchKind::OddEven, false),
    row(3, (1, 1), "13.451787406253272", "2.8889144618608733", "2.8514754095228265", 11, 6, BranchKind::OddEven, false),
    row(3, (1, 2), "13.60916416956247", "2.8011806024112604", "2.8994928664781003", 13, 7, BranchKind::OddEven, false),
    row(3, (1, 3), "13.719567754906889", "2.737827736709047", "2.9324647582021814", 15, 8, BranchKind::OddEven, false),
    row(3, (2, 1), "13.801004797570164", "2.689923890770301", "2.9564685196206826", 17, 9, BranchKind::OddEven, false),
    row(3, (2, 2), "14.320649658996734", "2.344448198979306", "3.106748248260848", 2, 1, BranchKind::OddEven, false),
    row(3, (2, 3), "14.657003574778068", "2.0202122629047206", "3.212388918731313", 17, 8, BranchKind::OddEven, false),
    row(3, (3, 1), "14.686554119081652", "1.9783743950165875", "3.2235432541405697", 15, 7, BranchKind::OddEven, false),
    row(3, (3, 2), "14.719531067694582", "1.9241180805387452", "3.2371600512994565", 13, 6, BranchKind::OddEven, false),
    row(3, (3, 3), "14.754026030069339", "1.8509347720107878", "3.254002265714927", 11, 5, BranchKind::OddEven, false),
    row(4, (1, 1), "14.782277611145048", "1.7467887078517095", "3.274928737204819", 9, 4, BranchKind::OddEven, false),
    row(4, (1, 2), "14.786834114569135", "1.6762115129006632", "3.287061516889608", 16, 7, BranchKind::OddEven, false),
    row(4, (1, 3), "14.774959957278682", "1.5866395627104857", "3.300053407198923", 7, 3, BranchKind::OddEven, false),
    row(4, (2, 1), "14.7286222583901", "1.4691728012133716", "3.3129725743424996", 12, 5, BranchKind::OddEven, false),
    row(4, (2, 2), "14.699688133885457", "1.4214348721248662", "3.316877441047812", 17, 7, BranchKind::OddEven, false),
    row(4, (2, 3), "14.60791563192398", "1.3083245035642173", "3.3230110738911285", 5, 2, BranchKind::OddEven, false),
    row(4, (3, 1), "14.4942511626078", "1.2033604318255704", "3.324782465355579", 18, 7, BranchKind::OddEven, false),
    row(4, (3, 2), "14.444161869664121", "1.163467447374621", "3.3244726259938155", 13, 5, BranchKind::OddEven, false),
    row(4, (3, 3), "14.319901500300364", "1.0746785092812807", "3.321867812104126", 8, 3, BranchKind::OddEven, false),
    row(5, (1, 1), "14.155328130457113", "0.9714850334241202", "3.3156069432644326", 11, 4, BranchKind::OddEven, false),
    row(5, (1, 2), "14.054387879818348", "0.9133674393862702", "3.310617589529648", 14, 5, BranchKind::OddEven, false),
    row(5, (1, 3), "13.986985590840762", "0.8760917450402825", "3.306890869738851", 17, 6, BranchKind::OddEven, false),
    row(5, (2, 1), "13.659851940872658", "0.70551977441241", "3.285155344523193", 3, 1, BranchKind::OddEven, false),
    row(5, (2, 2), "13.315322141213205", "0.5298843477532729", "3.2569218042195365", 16, 5, BranchKind::OddEven, false),
    row(5, (2, 3), "13.240214962690887", "0.4900089555434633", "3.250127637396059", 13, 4, BranchKind::OddEven, false),
    row(5, (3, 1), "13.125795380869723", "0.4265448292958072", "3.239357536186598", 10, 3, BranchKind::OddEven, false),
    row(5, (3, 2), "13.0441592363555", "0.3781732129466524", "3.23136706052875", 17, 5, BranchKind::OddEven, false),
    row(5, (3, 3), "12.938357527438528", "0.30903261362830825", "3.2206342443812517", 7, 4, BranchKind::OddEven, true),
];

/// The angle a row is checked against. The angle columns of the first two
/// tables are exchanged in print: the angles listed under the odd table
/// belong, row by row, to the odd/even coordinates of the second table and
/// the other way round. Every other row keeps its printed angle.
pub fn checked_angle(index: usize) -> (i64, i64) {
    let row = &TABLES[index];
    let source = match row.table {
        1 => &TABLES[index + 9],
        2 => &TABLES[index - 9],
        _ => row,
    };
    (source.p, source.q)
}

fn parse(s: &str) -> f64 {
    s.parse().expect("fixture values are valid decimals")
}
