/*
 * fgsmbench C API.
 *
 * A small adversarial-robustness benchmark for grayscale image classifiers:
 * synthetic data generation, CNN training, gradient-sign attacks, SSIM, and
 * CSV/SVG reporting. All state lives behind opaque handles; every function
 * returns fb_status, with FB_OK on success. On failure fb_last_error()
 * returns a message describing the most recent error on the calling thread.
 *
 * Handles are single-owner: free each one exactly once with its matching
 * *_free function. NULL is always a valid argument to the free functions.
 */

#ifndef FGSMBENCH_H
#define FGSMBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FB_API __declspec(dllexport)
#else
#define FB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
    FB_OK = 0,
    FB_ERROR_ARGUMENT = 1, /* bad argument, shape mismatch, null handle */
    FB_ERROR_CONFIG = 2,   /* malformed or invalid configuration */
    FB_ERROR_DATA = 3,     /* malformed dataset, image or checkpoint file */
    FB_ERROR_IO = 4,       /* filesystem failure */
    FB_ERROR_RUNTIME = 5   /* anything else */
} fb_status;

typedef struct fb_config fb_config;
typedef struct fb_dataset fb_dataset;
typedef struct fb_model fb_model;
typedef struct fb_report fb_report;

/* Library version string, e.g. "0.1.0". */
FB_API const char* fb_version(void);

/* Message for the last failure on this thread; empty string if none. The
 * pointer stays valid until the next failing call on the same thread. */
FB_API const char* fb_last_error(void);

/* ---- configuration ---------------------------------------------------- */

/* Built-in defaults: synthetic 100-image 64x64 dataset, 90/10 split, the
 * stock CNN, the "high" epsilon grid. */
FB_API fb_status fb_config_default(fb_config** out);
FB_API fb_status fb_config_parse_file(const char* path, fb_config** out);
FB_API fb_status fb_config_parse_text(const char* text, fb_config** out);
/* Override one "section.key" value, e.g. ("dataset.seed", "7"). */
FB_API fb_status fb_config_set(fb_config* cfg, const char* dotted_key, const char* value);
/* Copies the effective value of "section.key" into buf (NUL terminated).
 * Fails with FB_ERROR_ARGUMENT on unknown keys or a too-small buffer. */
FB_API fb_status fb_config_get(const fb_config* cfg, const char* dotted_key, char* buf,
                               size_t buf_len);
FB_API void fb_config_free(fb_config* cfg);

/* ---- datasets ---------------------------------------------------------- */

FB_API fb_status fb_dataset_synth(uint64_t n, uint64_t image_size, uint64_t seed,
                                  fb_dataset** out);
/* Loads "id,relative-path,label" records; resize_to > 0 resizes every image. */
FB_API fb_status fb_dataset_from_manifest(const char* manifest_path, uint64_t resize_to,
                                          fb_dataset** out);
/* The dataset the config describes (synthetic or manifest). */
FB_API fb_status fb_dataset_from_config(const fb_config* cfg, fb_dataset** out);
FB_API fb_status fb_dataset_split(const fb_dataset* ds, double train_fraction, uint64_t seed,
                                  fb_dataset** train_out, fb_dataset** test_out);
/* Writes dir/images/<id>.pgm plus dir/manifest.csv. */
FB_API fb_status fb_dataset_write(const fb_dataset* ds, const char* dir);
FB_API fb_status fb_dataset_count(const fb_dataset* ds, uint64_t* out);
FB_API void fb_dataset_free(fb_dataset* ds);

/* ---- models ------------------------------------------------------------ */

/* Trains the configured architecture on train_set; deterministic given the
 * config seeds. */
FB_API fb_status fb_model_train(const fb_config* cfg, const fb_dataset* train_set,
                                fb_model** out);
FB_API fb_status fb_model_save(const fb_model* model, const char* path);
FB_API fb_status fb_model_load(const char* path, fb_model** out);
/* Clean accuracy of the model over a dataset. */
FB_API fb_status fb_model_evaluate(const fb_model* model, const fb_dataset* ds,
                                   double* accuracy_out);
FB_API void fb_model_free(fb_model* model);

/* ---- attack sweep and reports ------------------------------------------ */

/* Runs the epsilon sweep from the config against test_set and assembles the
 * report in memory. out_dir may be NULL; when set, adversarial PGM dumps
 * requested by the config are written beneath it. */
FB_API fb_status fb_sweep_run(const fb_config* cfg, const fb_model* model,
                              const fb_dataset* test_set, const char* out_dir,
                              fb_report** out);
FB_API fb_status fb_report_row_count(const fb_report* report, uint64_t* out);
FB_API fb_status fb_report_row(const fb_report* report, uint64_t index, double* epsilon_out,
                               double* accuracy_out, double* mean_ssim_out,
                               uint64_t* n_samples_out);
FB_API fb_status fb_report_clean_accuracy(const fb_report* report, double* out);
/* Writes sweep.csv / detail.csv / charts / report.json per the formats list
 * (comma separated: "csv,svg,json"; NULL means that list). */
FB_API fb_status fb_report_write(const fb_report* report, const char* out_dir,
                                 const char* formats);
FB_API fb_status fb_report_load_json(const char* path, fb_report** out);
FB_API void fb_report_free(fb_report* report);

/* ---- whole pipeline stages (what the CLI drives) ------------------------ */

/* Synthesize the configured dataset and write it under out_dir. */
FB_API fb_status fb_stage_synth(const fb_config* cfg, const char* out_dir,
                                uint64_t* count_out);
/* Dataset -> split -> train; writes out_dir/model.ckpt and train.json, and
 * reports the clean test accuracy. */
FB_API fb_status fb_stage_train(const fb_config* cfg, const char* out_dir,
                                double* test_accuracy_out);
/* Rebuilds the configured dataset/split, loads the checkpoint, runs the
 * sweep and writes report files into out_dir. */
FB_API fb_status fb_stage_attack(const fb_config* cfg, const char* model_path,
                                 const char* out_dir);
/* Full pipeline into out_dir (model.ckpt, sweep.csv, detail.csv, charts,
 * report.json). */
FB_API fb_status fb_stage_sweep(const fb_config* cfg, const char* out_dir);

/* ---- SSIM -------------------------------------------------------------- */

/* Mean SSIM between two PGM files (uniform window, stride 1). */
FB_API fb_status fb_ssim_files(const char* path_a, const char* path_b, uint32_t window,
                               double dynamic_range, double* mean_ssim_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FGSMBENCH_H */
