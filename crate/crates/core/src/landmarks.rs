//! Landmark and cluster names shared by calibration, the segment recipes in
//! the anthropometric documents, and the session files.

pub const HEAD_CLUSTER: &str = "head";
pub const THORAX_CLUSTER: &str = "thorax";
pub const LEFT_UPPER_ARM_CLUSTER: &str = "left_upper_arm";
pub const RIGHT_UPPER_ARM_CLUSTER: &str = "right_upper_arm";
pub const LEFT_FOREARM_CLUSTER: &str = "left_forearm";
pub const RIGHT_FOREARM_CLUSTER: &str = "right_forearm";
pub const WHEELCHAIR_CLUSTER: &str = "wheelchair";

/// The six body clusters followed by the wheelchair cluster.
pub const CLUSTERS: [&str; 7] = [
    HEAD_CLUSTER,
    THORAX_CLUSTER,
    LEFT_UPPER_ARM_CLUSTER,
    RIGHT_UPPER_ARM_CLUSTER,
    LEFT_FOREARM_CLUSTER,
    RIGHT_FOREARM_CLUSTER,
    WHEELCHAIR_CLUSTER,
];

// pelvis
pub const LASIS: &str = "LASIS";
pub const RASIS: &str = "RASIS";
pub const SYM: &str = "SYM";
pub const LPSIS: &str = "LPSIS";
pub const RPSIS: &str = "RPSIS";

// lower limbs (femoral epicondyles, malleoli)
pub const LFLE: &str = "LFLE";
pub const LFME: &str = "LFME";
pub const RFLE: &str = "RFLE";
pub const RFME: &str = "RFME";
pub const LLM: &str = "LLM";
pub const LMM: &str = "LMM";
pub const RLM: &str = "RLM";
pub const RMM: &str = "RMM";

// thorax
pub const C7: &str = "C7";
pub const LAC: &str = "LAC";
pub const RAC: &str = "RAC";
/// Incisura jugularis (suprasternal notch).
pub const IJ: &str = "IJ";

// head
pub const HV: &str = "HV";
pub const SEL: &str = "SEL";

// arms (humeral epicondyles, ulnar/radial styloids)
pub const LHLE: &str = "LHLE";
pub const LHME: &str = "LHME";
pub const RHLE: &str = "RHLE";
pub const RHME: &str = "RHME";
pub const LUS: &str = "LUS";
pub const LRS: &str = "LRS";
pub const RUS: &str = "RUS";
pub const RRS: &str = "RRS";

// metacarpal head markers, read directly from each frame
pub const LMC2: &str = "LMC2";
pub const LMC5: &str = "LMC5";
pub const RMC2: &str = "RMC2";
pub const RMC5: &str = "RMC5";
pub const HAND_MARKERS: [&str; 4] = [LMC2, LMC5, RMC2, RMC5];

// joint centres produced by calibration
pub const LJC: &str = "LJC";
pub const LHJC: &str = "LHJC";
pub const RHJC: &str = "RHJC";
pub const CJC: &str = "CJC";
pub const LSJC: &str = "LSJC";
pub const RSJC: &str = "RSJC";
pub const LEJC: &str = "LEJC";
pub const REJC: &str = "REJC";
pub const LWJC: &str = "LWJC";
pub const RWJC: &str = "RWJC";
pub const LKJC: &str = "LKJC";
pub const RKJC: &str = "RKJC";
pub const LAJC: &str = "LAJC";
pub const RAJC: &str = "RAJC";

// wheelchair geometry, probed into the wheelchair cluster
pub const LEFT_WHEEL_CENTRE: &str = "LWC";
pub const RIGHT_WHEEL_CENTRE: &str = "RWC";
pub const CONTACT_REAR_LEFT: &str = "CRL";
pub const CONTACT_REAR_RIGHT: &str = "CRR";
pub const CONTACT_FRONT_LEFT: &str = "CFL";
pub const CONTACT_FRONT_RIGHT: &str = "CFR";

/// Probed points and the cluster each is added to.
pub const PROBED_POINTS: [(&str, &str); 27] = [
    (LASIS, WHEELCHAIR_CLUSTER),
    (RASIS, WHEELCHAIR_CLUSTER),
    (SYM, WHEELCHAIR_CLUSTER),
    (LFLE, WHEELCHAIR_CLUSTER),
    (LFME, WHEELCHAIR_CLUSTER),
    (RFLE, WHEELCHAIR_CLUSTER),
    (RFME, WHEELCHAIR_CLUSTER),
    (LLM, WHEELCHAIR_CLUSTER),
    (LMM, WHEELCHAIR_CLUSTER),
    (RLM, WHEELCHAIR_CLUSTER),
    (RMM, WHEELCHAIR_CLUSTER),
    (C7, THORAX_CLUSTER),
    (LAC, THORAX_CLUSTER),
    (RAC, THORAX_CLUSTER),
    (IJ, THORAX_CLUSTER),
    (HV, HEAD_CLUSTER),
    (SEL, HEAD_CLUSTER),
    (LHLE, LEFT_UPPER_ARM_CLUSTER),
    (LHME, LEFT_UPPER_ARM_CLUSTER),
    (RHLE, RIGHT_UPPER_ARM_CLUSTER),
    (RHME, RIGHT_UPPER_ARM_CLUSTER),
    (LUS, LEFT_FOREARM_CLUSTER),
    (LRS, LEFT_FOREARM_CLUSTER),
    (RUS, RIGHT_FOREARM_CLUSTER),
    (RRS, RIGHT_FOREARM_CLUSTER),
    (LEFT_WHEEL_CENTRE, WHEELCHAIR_CLUSTER),
    (RIGHT_WHEEL_CENTRE, WHEELCHAIR_CLUSTER),
];

pub const PROBED_CONTACTS: [&str; 4] = [
    CONTACT_REAR_LEFT,
    CONTACT_REAR_RIGHT,
    CONTACT_FRONT_LEFT,
    CONTACT_FRONT_RIGHT,
];
