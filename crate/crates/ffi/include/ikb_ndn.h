#ifndef IKB_NDN_H
#define IKB_NDN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Why the forwarder discarded a packet; `None` when nothing was dropped.
 */
typedef enum IkbDropReason {
  IKB_DROP_REASON_NONE = 0,
  IKB_DROP_REASON_UNSOLICITED = 1,
  IKB_DROP_REASON_KEY_MISMATCH = 2,
  IKB_DROP_REASON_BAD_SIGNATURE = 3,
  IKB_DROP_REASON_SCN_DIGEST_MISMATCH = 4,
  IKB_DROP_REASON_EXCLUDE_MATCH = 5,
  IKB_DROP_REASON_UNBOUND_INTEREST = 6,
  IKB_DROP_REASON_MALFORMED = 7,
} IkbDropReason;

/**
 * Router verification policy.
 */
typedef enum IkbPolicy {
  IKB_POLICY_NONE = 0,
  IKB_POLICY_FULL = 1,
  /**
   * Uses the `verify_probability` argument.
   */
  IKB_POLICY_PROBABILISTIC = 2,
  IKB_POLICY_EDGE_ONLY = 3,
} IkbPolicy;

/**
 * Result of every fallible call.
 */
typedef enum IkbStatus {
  IKB_STATUS_OK = 0,
  IKB_STATUS_NULL_POINTER = 1,
  IKB_STATUS_INVALID_ARGUMENT = 2,
  IKB_STATUS_DECODE = 3,
  IKB_STATUS_CRYPTO = 4,
  IKB_STATUS_IO = 5,
  IKB_STATUS_PANIC = 6,
} IkbStatus;

/**
 * Opaque forwarder with the outputs of the last handled packet.
 */
typedef struct IkbForwarder IkbForwarder;

/**
 * Opaque Ed25519 key pair.
 */
typedef struct IkbKeyPair IkbKeyPair;

/**
 * Heap bytes owned by the library.
 */
typedef struct IkbBuffer {
  uint8_t *data;
  size_t len;
} IkbBuffer;

/**
 * Summary of what the forwarder did with one packet. The packets it emitted
 * are read with [`ikb_forwarder_output`].
 */
typedef struct IkbActions {
  uint32_t forwarded_interests;
  uint32_t delivered_contents;
  enum IkbDropReason drop_reason;
  uint32_t signature_verifications;
  bool cache_hit;
} IkbActions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *ikb_last_error(void);

/**
 * # Safety
 * `buffer` must be null or point to a buffer returned by this library that
 * has not been freed yet.
 */
void ikb_buffer_free(struct IkbBuffer *buffer);

/**
 * Derives a key pair from a 32-byte seed.
 *
 * # Safety
 * `seed` must point to 32 readable bytes and `out` to writable storage.
 */
enum IkbStatus ikb_keypair_from_seed(const uint8_t *seed, struct IkbKeyPair **out_key);

/**
 * # Safety
 * `key` must be null or a handle from [`ikb_keypair_from_seed`].
 */
void ikb_keypair_free(struct IkbKeyPair *key);

/**
 * Copies the 32-byte public key into `out32`.
 *
 * # Safety
 * `key` must be a live handle and `out32` must have room for 32 bytes.
 */
enum IkbStatus ikb_keypair_public_key(const struct IkbKeyPair *key, uint8_t *out32);

/**
 * Builds and signs a data object; writes its wire encoding to `out_wire`.
 *
 * # Safety
 * `key` must be a live handle, `name` a NUL-terminated string, `payload`
 * valid for `payload_len` bytes and `out_wire` writable.
 */
enum IkbStatus ikb_sign_content(const struct IkbKeyPair *key,
                                const char *name,
                                const uint8_t *payload,
                                size_t payload_len,
                                uint64_t freshness_s,
                                struct IkbBuffer *out_wire);

/**
 * Sets `*out_valid` to whether the encoded content verifies under the
 * 32-byte `public_key`.
 *
 * # Safety
 * `wire` must be valid for `wire_len` bytes, `public_key` for 32 bytes and
 * `out_valid` writable.
 */
enum IkbStatus ikb_verify_content(const uint8_t *wire,
                                  size_t wire_len,
                                  const uint8_t *public_key,
                                  bool *out_valid);

/**
 * Writes the 32-byte implicit digest of an encoded content object.
 *
 * # Safety
 * `wire` must be valid for `wire_len` bytes and `out32` for 32 bytes.
 */
enum IkbStatus ikb_content_digest(const uint8_t *wire, size_t wire_len, uint8_t *out32);

/**
 * Creates a forwarder. `is_edge` matters only for `IkbPolicy::EdgeOnly`.
 *
 * # Safety
 * `out_forwarder` must be writable.
 */
enum IkbStatus ikb_forwarder_new(size_t cache_capacity,
                                 enum IkbPolicy policy,
                                 double verify_probability,
                                 bool is_edge,
                                 uint64_t rng_seed,
                                 struct IkbForwarder **out_forwarder);

/**
 * # Safety
 * `forwarder` must be null or a handle from [`ikb_forwarder_new`].
 */
void ikb_forwarder_free(struct IkbForwarder *forwarder);

/**
 * Adds `prefix -> face` to the forwarding table.
 *
 * # Safety
 * `forwarder` must be a live handle and `prefix` a NUL-terminated string.
 */
enum IkbStatus ikb_forwarder_add_route(struct IkbForwarder *forwarder,
                                       const char *prefix,
                                       uint32_t face);

/**
 * Feeds one encoded packet (interest or content) arriving on `face` at
 * `now_us` microseconds. Replaces the previous packet's outputs.
 *
 * # Safety
 * `forwarder` must be a live handle, `wire` valid for `wire_len` bytes and
 * `out_actions` writable.
 */
enum IkbStatus ikb_forwarder_handle(struct IkbForwarder *forwarder,
                                    uint32_t face,
                                    const uint8_t *wire,
                                    size_t wire_len,
                                    uint64_t now_us,
                                    struct IkbActions *out_actions);

/**
 * Number of packets emitted by the last [`ikb_forwarder_handle`] call.
 *
 * # Safety
 * `forwarder` must be a live handle.
 */
size_t ikb_forwarder_output_count(const struct IkbForwarder *forwarder);

/**
 * The `index`-th emitted packet: forwarded interests first, then delivered
 * contents.
 *
 * # Safety
 * `forwarder` must be a live handle; `out_face` and `out_wire` writable.
 */
enum IkbStatus ikb_forwarder_output(const struct IkbForwarder *forwarder,
                                    size_t index,
                                    uint32_t *out_face,
                                    struct IkbBuffer *out_wire);

/**
 * Number of objects currently cached.
 *
 * # Safety
 * `forwarder` must be a live handle.
 */
size_t ikb_forwarder_cache_len(const struct IkbForwarder *forwarder);

/**
 * Runs one simulation and reports the fraction of consumers that retrieved
 * valid content and the largest number of fakes cached at any sample.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; outputs writable.
 */
enum IkbStatus ikb_simulate(const char *topology_path,
                            const char *scenario_path,
                            double *out_fraction_retrieved,
                            uint64_t *out_max_fake_occupancy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IKB_NDN_H */
