//! Runs every example so they stay in sync with the library.

mod normal_probabilities {
    include!("../examples/normal_probabilities.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod discrete_moments {
    include!("../examples/discrete_moments.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod correlation_estimators {
    include!("../examples/correlation_estimators.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod tetrad_tests {
    include!("../examples/tetrad_tests.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod fofc_clustering {
    include!("../examples/fofc_clustering.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod simulation {
    include!("../examples/simulation.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod evaluation_batch {
    include!("../examples/evaluation_batch.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod studies {
    include!("../examples/studies.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}
