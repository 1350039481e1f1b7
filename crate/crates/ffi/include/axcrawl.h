#ifndef AXCRAWL_H
#define AXCRAWL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AxcStatus {
  AXC_STATUS_OK = 0,
  AXC_STATUS_NULL_ARGUMENT = 1,
  AXC_STATUS_INVALID_UTF8 = 2,
  AXC_STATUS_INVALID_INPUT = 3,
  AXC_STATUS_BACKEND = 4,
  AXC_STATUS_PANIC = 5,
} AxcStatus;

// A loaded application spec.
typedef struct AxcApp AxcApp;

// A live simulator session.
typedef struct AxcSession AxcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library from the same thread.
const char *axc_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void axc_string_free(char *s);

// Library version, statically allocated.
const char *axc_version(void);

// Parses an app spec from a JSON string.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum AxcStatus axc_app_from_json(const char *json, struct AxcApp **out);

// Loads an app spec file (`*.app.json`).
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum AxcStatus axc_app_from_file(const char *path, struct AxcApp **out);

// # Safety
// `app` must come from `axc_app_from_*` and not be used afterwards. Null is
// ignored.
void axc_app_free(struct AxcApp *app);

// Starts a fresh session at the app's initial state. The session does not
// borrow `app`; either may be freed first.
//
// # Safety
// `app` must be a live handle; `out` must be writable.
enum AxcStatus axc_session_start(const struct AxcApp *app, struct AxcSession **out);

// # Safety
// `session` must come from `axc_session_start` and not be used afterwards.
// Null is ignored.
void axc_session_free(struct AxcSession *session);

// Current screen state as JSON (`tree`, `image_name`, `scaling_factor`).
//
// # Safety
// `session` must be a live handle; `out_json` must be writable.
enum AxcStatus axc_session_observe(struct AxcSession *session, char **out_json);

// Clicks at (`x`, `y`) in screen points. `out_changed` may be null.
//
// # Safety
// `session` must be a live handle.
enum AxcStatus axc_session_click(struct AxcSession *session, double x, double y, bool *out_changed);

// Types `text` into element `target_id`. `out_changed` may be null.
//
// # Safety
// `session` must be a live handle; `text` a nul-terminated string.
enum AxcStatus axc_session_type(struct AxcSession *session,
                                uint32_t target_id,
                                const char *text,
                                bool *out_changed);

// # Safety
// `session` must be a live handle. `out_changed` may be null.
enum AxcStatus axc_session_press_enter(struct AxcSession *session, bool *out_changed);

// Crawls the app with deterministic agents and synthesizes its tasks.
// `config_json` may be null for the defaults; otherwise it is a crawler
// config object whose missing fields take their defaults. Either output
// pointer may be null when that output is not wanted.
//
// # Safety
// `app` must be a live handle; non-null pointers must be valid.
enum AxcStatus axc_crawl(const struct AxcApp *app,
                         const char *config_json,
                         char **out_graph_json,
                         char **out_tasks_jsonl);

// Judges a raw model prediction against one task record (a JSON object as
// found on a line of `tasks.jsonl`). An unparseable prediction is a miss,
// not an error.
//
// # Safety
// `prediction` and `record_json` must be nul-terminated strings; `out_hit`
// must be writable.
enum AxcStatus axc_judge(const char *prediction, const char *record_json, bool *out_hit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AXCRAWL_H */
