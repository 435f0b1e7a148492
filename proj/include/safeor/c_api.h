#ifndef SAFEOR_C_API_H
#define SAFEOR_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef uint64_t safeor_handle;

enum safeor_status {
  SAFEOR_OK = 0,
  SAFEOR_ERR_CONFIG = 2,
  SAFEOR_ERR_UNKNOWN_ENV = 4,
  SAFEOR_ERR_DIMENSION = 5,
  SAFEOR_ERR_HANDLE = 6,
  SAFEOR_ERR_FINISHED = 7,
  SAFEOR_ERR_BUFFER = 8,
  SAFEOR_ERR_OTHER = 9
};

/* Message of the last failing call on this thread. */
const char* safeor_last_error(void);

int safeor_make(const char* env_name, const char* config_json, safeor_handle* out);

int safeor_spec(safeor_handle h, size_t* obs_dim, size_t* act_dim, int* horizon);

int safeor_reset(safeor_handle h, double* obs, size_t obs_len);

int safeor_step(safeor_handle h, const double* action, size_t action_len, double* obs, size_t obs_len,
                double* reward, double* cost, int* terminated, int* truncated);

/* Info of the last step, as key/value pairs. Keys stay valid until the next step or close. */
int safeor_info_size(safeor_handle h, size_t* n);
int safeor_info_entry(safeor_handle h, size_t i, const char** key, double* value);

/* Sanitized action of the last step; its length is the action dimension. */
int safeor_sanitized_action(safeor_handle h, double* out, size_t len);

int safeor_close(safeor_handle h);

#ifdef __cplusplus
}
#endif

#endif
