#pragma once

#include "flexwing/errors.hpp"

namespace flexwing {

// Physical constants of the uniform bending/twisting beam plus the two
// root-actuator scalings. Units are SI (or any consistent set).
struct BeamParameters {
    double mu = 1.0;    // mass per unit span
    double EI = 1.0;    // bending rigidity
    double GJ = 1.0;    // torsion rigidity
    double S_y = 0.0;   // static moment per unit span (inertial coupling)
    double I_y = 1.0;   // moment of inertia per unit span
    double L = 1.0;     // span
    double B1 = 1.0;    // bending-moment actuator scale
    double B2 = 1.0;    // torque actuator scale

    // Determinant of the 2x2 inertia block [mu, -S_y; -S_y, I_y].
    double inertia_det() const { return mu * I_y - S_y * S_y; }

    void validate() const {
        if (mu <= 0.0) throw ParameterError("beam: mu must be positive");
        if (EI <= 0.0) throw ParameterError("beam: EI must be positive");
        if (GJ <= 0.0) throw ParameterError("beam: GJ must be positive");
        if (I_y <= 0.0) throw ParameterError("beam: I_y must be positive");
        if (L <= 0.0) throw ParameterError("beam: span L must be positive");
        if (inertia_det() <= 0.0)
            throw ParameterError("beam: inertia block mu*I_y - S_y^2 must be positive "
                                 "(mass matrix would be singular)");
    }
};

}  // namespace flexwing
