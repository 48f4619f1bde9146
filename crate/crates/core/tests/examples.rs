//! Every example runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));

            #[test]
            fn runs() {
                main().expect(stringify!($name));
            }
        }
    };
}

example!(rigid_registration);
example!(cluster_tracking);
example!(joint_centres);
example!(whole_body_com);
example!(centre_of_pressure);
example!(bland_altman);
example!(synthetic_session);
