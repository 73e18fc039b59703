//! Completed L-functions, functional-equation validation and zero counting.

pub mod count;
pub mod family;
pub mod instance;

pub use count::{
    count_zeros_box, critical_line_scan, critical_value, refine_zero, BoxCount, CountOptions, CountStatus, ScanReport,
    ZeroCountReport, CONTOUR_TOLERANCE,
};
pub use family::{
    classify_eta, classify_eta_for, convexity_probe, family_density, family_density_for, ConvexityRow, EtaReport,
    FamilyDensityReport, FamilyMode, FamilyOptions, MemberCount,
};
pub use instance::{
    build_instance, gamma_product, Evaluation, FeReport, GammaConvention, InstanceConfig, LFunctionInstance,
    LineParameters, Validation, DEFAULT_T_MAX, SIGMA_RIGHT,
};
