#pragma once

#include <cstddef>

namespace pimc_ho::reference {

// Published PIMC thermodynamic energies of Sakkos, Casulleras and Boronat
// (J. Chem. Phys. 130, 204109 (2009)) for the harmonic oscillator at tau = 5,
// quoted to the five decimals they report. Used as display columns and as an
// external cross-check of the analytic results.

struct SakkosRow {
    int n;
    double pa;
    double ti;
};

inline constexpr SakkosRow sakkos_pa_ti[] = {
    {2, 0.30755, 0.44702},   {4, 0.43162, 0.50053},  {8, 0.48424, 0.50630},
    {16, 0.50085, 0.50675},  {32, 0.50528, 0.50678}, {64, 0.50641, 0.50678},
    {128, 0.50669, 0.0},     {256, 0.50676, 0.0},    {512, 0.50678, 0.0},
};
inline constexpr std::size_t sakkos_pa_ti_rows = sizeof(sakkos_pa_ti) / sizeof(sakkos_pa_ti[0]);

struct SakkosCaRow {
    int n;
    double ca1;
    double ca2;
};

inline constexpr SakkosCaRow sakkos_ca[] = {
    {2, 0.50444, 0.50643}, {3, 0.50649, 0.50675}, {4, 0.50673, 0.50677},
    {5, 0.50677, 0.50678}, {6, 0.50678, 0.50678}, {7, 0.50678, 0.0},
};
inline constexpr std::size_t sakkos_ca_rows = sizeof(sakkos_ca) / sizeof(sakkos_ca[0]);

} // namespace pimc_ho::reference
