/* magnonduet — simulator and analysis toolkit for two coupled nonlinear
 * two-level oscillators (magnon condensate pairs).
 *
 * C API of the shared library. Heavy objects live behind opaque handles;
 * every fallible call returns an md_status and leaves a human-readable
 * message in md_last_error() (thread-local, valid until the next call on
 * the same thread). Frequencies in this API are angular (rad/s) unless a
 * name says _hz; conversions happen at the caller's boundary.
 */

#ifndef MAGNONDUET_H
#define MAGNONDUET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MD_API __declspec(dllexport)
#else
#  define MD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum md_status {
  MD_OK = 0,
  MD_ERR_INVALID_ARGUMENT = 1,
  MD_ERR_DOMAIN = 2,
  MD_ERR_INTEGRATION = 3,
  MD_ERR_NO_CROSSING = 4,
  MD_ERR_IO = 5,
  MD_ERR_INTERNAL = 6
} md_status;

MD_API const char* md_status_name(md_status status);
MD_API const char* md_last_error(void);
MD_API const char* md_version(void);

/* ------------------------------------------------------------------ */
/* System parameters (plain struct; validated by the functions)        */

typedef struct md_params {
  double omega_bar_b;      /* bare bulk frequency, rad/s */
  double omega_bar_s;      /* bare surface frequency, rad/s */
  double coupling;         /* inter-level coupling, rad/s, >= 0 */
  double k_selftrap;       /* self-trapping coefficient, >= 0 */
  double p_exponent;       /* power-law exponent, in (0, 1) */
  double surface_coeff_b;  /* surface shift per bulk population^p */
  double surface_coeff_s;  /* surface shift per surface population^p */
  double tau_b;            /* bulk amplitude decay time, s (or INFINITY) */
  double tau_s;            /* surface amplitude decay time, s */
  double fill_b;           /* signal amplitude per sqrt(magnon), bulk */
  double fill_s;           /* signal amplitude per sqrt(magnon), surface */
  double omega_larmor;     /* lab-frame carrier, rad/s; 0 = rotating frame */
  double coupling_nb_slope;/* linear growth of coupling with bulk population */
} md_params;

MD_API void md_params_init(md_params* params);
MD_API md_status md_params_validate(const md_params* params);

/* ------------------------------------------------------------------ */
/* Closed-form relations                                               */

MD_API md_status md_bulk_frequency(const md_params* params, double n_b,
                                   double* out_rad);
MD_API md_status md_surface_frequency(const md_params* params, double n_b,
                                      double n_s, double* out_rad);
MD_API md_status md_dressed_frequencies(double omega_b, double omega_s,
                                        double coupling, double* lower,
                                        double* upper);
MD_API md_status md_rabi_frequency(double omega_b, double omega_s,
                                   double coupling, double* out_rad);
MD_API md_status md_josephson_amplitude(double coupling, double n_b,
                                        double n_s, double omega_b,
                                        double omega_s, double* out);
MD_API md_status md_fm_sideband_amplitude(double delta_omega_b, double omega_j,
                                          int order, double carrier_amp,
                                          double* out);
MD_API md_status md_lz_transfer_fraction(double coupling, double crossing_rate,
                                         double* out);
MD_API md_status md_bloch_coordinates(double re_b, double im_b, double re_s,
                                      double im_s, double* n_total,
                                      double* theta, double* phi);
/* branch: 0 = ground, 1 = excited; writes the four state components */
MD_API md_status md_eigenstate(double omega_b, double omega_s, double coupling,
                               int branch, double n_total, double* re_b,
                               double* im_b, double* re_s, double* im_s);

/* ------------------------------------------------------------------ */
/* Frequency schedule                                                  */

typedef struct md_schedule md_schedule;

MD_API md_schedule* md_schedule_new_physical(void);
/* times strictly increasing; detuning = omega_b - omega_s, rad/s; the two
 * levels are placed symmetrically about center_rad */
MD_API md_schedule* md_schedule_new_programmed(const double* times,
                                               const double* detuning_rad,
                                               size_t count, double center_rad);
/* optional monotone non-increasing table n_b -> omega_b overriding the
 * power law (physical mode only) */
MD_API md_status md_schedule_set_bulk_table(md_schedule* schedule,
                                            const double* n_b,
                                            const double* omega_rad,
                                            size_t count);
MD_API void md_schedule_free(md_schedule* schedule);

/* ------------------------------------------------------------------ */
/* Time evolution                                                      */

typedef struct md_trajectory md_trajectory;

typedef enum md_traj_field {
  MD_TRAJ_T = 0,
  MD_TRAJ_RE_PSI_B,
  MD_TRAJ_IM_PSI_B,
  MD_TRAJ_RE_PSI_S,
  MD_TRAJ_IM_PSI_S,
  MD_TRAJ_N_B,
  MD_TRAJ_N_S,
  MD_TRAJ_OMEGA_B_RAD,
  MD_TRAJ_OMEGA_S_RAD,
  MD_TRAJ_DRESSED_LO_RAD,
  MD_TRAJ_DRESSED_HI_RAD
} md_traj_field;

/* sample_rate_hz = 0 picks 20x the largest frequency in the scenario */
MD_API md_status md_integrate(const md_params* params, double t0, double re_b,
                              double im_b, double re_s, double im_s,
                              const md_schedule* schedule, double t_end,
                              double rel_tol, double abs_tol,
                              double sample_rate_hz, md_trajectory** out);
MD_API size_t md_trajectory_size(const md_trajectory* traj);
MD_API double md_trajectory_sample_rate(const md_trajectory* traj);
MD_API md_status md_trajectory_copy(const md_trajectory* traj,
                                    md_traj_field field, double* buf,
                                    size_t buflen);
MD_API md_status md_trajectory_write_csv(const md_trajectory* traj,
                                         const char* path);
MD_API md_status md_trajectory_crossing(const md_trajectory* traj,
                                        double* t_cross, double* rate_rad_s2,
                                        int* found);
MD_API md_status md_trajectory_min_gap(const md_trajectory* traj,
                                       double* t_gap, double* gap_rad);
/* populations of the instantaneous ground/excited branches at one sample */
MD_API md_status md_branch_populations(const md_trajectory* traj, size_t index,
                                       double* ground, double* excited);
MD_API void md_trajectory_free(md_trajectory* traj);

/* ------------------------------------------------------------------ */
/* Signal synthesis                                                    */

typedef struct md_signal md_signal;

MD_API md_status md_synthesize(const md_trajectory* traj,
                               const md_params* params, double sample_rate_hz,
                               double noise_rms, uint64_t seed,
                               md_signal** out);
MD_API md_status md_signal_from_samples(double sample_rate_hz,
                                        double start_time,
                                        const double* samples, size_t count,
                                        md_signal** out);
MD_API md_status md_signal_read_csv(const char* path, md_signal** out);
MD_API size_t md_signal_size(const md_signal* sig);
MD_API double md_signal_sample_rate(const md_signal* sig);
MD_API double md_signal_start_time(const md_signal* sig);
MD_API md_status md_signal_copy(const md_signal* sig, double* buf,
                                size_t buflen);
MD_API md_status md_signal_write_csv(const md_signal* sig, const char* path);
MD_API md_status md_signal_write_binary(const md_signal* sig,
                                        const char* path);
MD_API void md_signal_free(md_signal* sig);

/* ------------------------------------------------------------------ */
/* Windowed Fourier analysis                                           */

typedef struct md_spectrogram md_spectrogram;

#define MD_WINDOW_HANN 0
#define MD_WINDOW_GAUSS 1

MD_API md_status md_spectrogram_compute(const md_signal* sig, double window_s,
                                        double hop_s, int window_kind,
                                        md_spectrogram** out);
MD_API md_status md_spectrogram_dims(const md_spectrogram* spec, size_t* nt,
                                     size_t* nf);
MD_API double md_spectrogram_resolution_hz(const md_spectrogram* spec);
MD_API double md_spectrogram_bin_spacing_hz(const md_spectrogram* spec);
MD_API md_status md_spectrogram_copy_times(const md_spectrogram* spec,
                                           double* buf, size_t buflen);
MD_API md_status md_spectrogram_copy_freqs(const md_spectrogram* spec,
                                           double* buf, size_t buflen);
/* row-major nt x nf */
MD_API md_status md_spectrogram_copy_magnitudes(const md_spectrogram* spec,
                                                double* buf, size_t buflen);
MD_API md_status md_spectrogram_write_csv(const md_spectrogram* spec,
                                          const char* path);
MD_API void md_spectrogram_free(md_spectrogram* spec);

typedef struct md_ridge_set md_ridge_set;

#define MD_RIDGE_UNKNOWN 0
#define MD_RIDGE_MAIN_BULK 1
#define MD_RIDGE_MAIN_SURFACE 2
#define MD_RIDGE_SIDEBAND_UPPER 3
#define MD_RIDGE_SIDEBAND_LOWER 4

MD_API md_status md_track_ridges(const md_spectrogram* spec, double min_amp,
                                 double max_hop_hz, md_ridge_set** out);
/* relabels in place; *warning set when fewer than two ridges exist */
MD_API md_status md_classify_sidebands(md_ridge_set* ridges, double rel_tol,
                                       double min_overlap_frac, int* warning);
MD_API size_t md_ridge_set_size(const md_ridge_set* ridges);
MD_API size_t md_ridge_size(const md_ridge_set* ridges, size_t ridge);
MD_API int md_ridge_label(const md_ridge_set* ridges, size_t ridge);
MD_API md_status md_ridge_copy(const md_ridge_set* ridges, size_t ridge,
                               double* t, double* freq_hz, double* amp,
                               size_t buflen);
MD_API md_status md_ridge_set_write_csv(const md_ridge_set* ridges,
                                        const char* path);
MD_API void md_ridge_set_free(md_ridge_set* ridges);

/* ------------------------------------------------------------------ */
/* Extracted observables                                               */

/* d omega_b / d amplitude^2 along a ridge trace (local quadratic regression
 * over squared amplitude; the track must be monotone in amp^2). Writes
 * count <= n points. */
MD_API md_status md_selftrap_derivative(const double* t, const double* freq_hz,
                                        const double* amp, size_t n,
                                        double bandwidth_frac, double* t_out,
                                        double* deriv_out, size_t* count);

/* Pointwise coupling estimates from the labeled sideband plus a linear
 * extrapolation to t_cross. valid_out entries are 0/1. */
MD_API md_status md_extract_coupling(const md_ridge_set* ridges,
                                     const double* t_deriv,
                                     const double* deriv, size_t n_deriv,
                                     double t_cross, double* t_out,
                                     double* omega_out, int* valid_out,
                                     size_t buflen, size_t* count,
                                     double* extrapolated_rad,
                                     int* extrapolation_ok);

typedef struct md_relax_segment {
  double t_start;
  double t_end;
  double tau;           /* s; INFINITY flags a non-decaying segment */
  double amplitude0;
  double residual_rms;  /* on log amplitude */
} md_relax_segment;

/* kink_time is NaN when the single-slope model wins */
MD_API md_status md_fit_relaxation(const double* t, const double* amp,
                                   size_t count, md_relax_segment segments[2],
                                   size_t* n_segments, double* kink_time);

typedef struct md_lz_report {
  double predicted_fraction;
  double observed_fraction;
  double crossing_time_s;
  double crossing_rate_rad_s2;
  double decay_only_rate_rad_s2;  /* NaN when not applicable */
  double rate_ratio;              /* NaN when not applicable */
  double min_gap_rad;
  double min_gap_time_s;
} md_lz_report;

MD_API md_status md_lz_report_compute(const md_trajectory* traj,
                                      md_lz_report* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MAGNONDUET_H */
