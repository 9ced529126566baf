//! Every example must run to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                main();
            }
        }
    };
}

example!(grid_layout);
example!(broadcast_schedules);
example!(cost_model);
example!(simulate_hsumma);
example!(sweep_groups);
example!(sweep_procs);
example!(exascale_prediction);
example!(validate_suite);
example!(command_line);
