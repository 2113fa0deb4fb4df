#ifndef IFC_MCP_H
#define IFC_MCP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IfcMcpStatus {
  IFC_MCP_STATUS_OK = 0,
  IFC_MCP_STATUS_NULL_ARGUMENT = 1,
  IFC_MCP_STATUS_INVALID_UTF8 = 2,
  IFC_MCP_STATUS_INVALID_JSON = 3,
  IFC_MCP_STATUS_IO = 4,
  IFC_MCP_STATUS_MODEL = 5,
  IFC_MCP_STATUS_TOOL_FAILED = 6,
  IFC_MCP_STATUS_INVALID_PARAMS = 7,
  IFC_MCP_STATUS_UNKNOWN_TOOL = 8,
  IFC_MCP_STATUS_PANIC = 9,
} IfcMcpStatus;

// Opaque session handle.
typedef struct IfcMcpSession IfcMcpSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *ifc_mcp_version(void);

// Message for the last failed call on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *ifc_mcp_last_error(void);

// New session with a fresh model. GUIDs are reproducible when `seeded`.
// Returns NULL on failure.
//
// # Safety
// `project_name` must be NULL or a valid NUL-terminated string.
struct IfcMcpSession *ifc_mcp_session_new(const char *project_name, uint64_t seed, bool seeded);

// Session over a model read from an IFC file.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum IfcMcpStatus ifc_mcp_session_open(const char *path,
                                       uint64_t seed,
                                       bool seeded,
                                       struct IfcMcpSession **out);

// Releases a session. NULL is ignored.
//
// # Safety
// `session` must be NULL or a handle from this library not yet freed.
void ifc_mcp_session_free(struct IfcMcpSession *session);

// Writes the session model to an IFC file.
//
// # Safety
// `session` must be a live handle and `path` a valid NUL-terminated string.
enum IfcMcpStatus ifc_mcp_session_save(struct IfcMcpSession *session, const char *path);

// Handles one JSON-RPC message. `*response` receives the response frame,
// or NULL for notifications.
//
// # Safety
// `session` must be a live handle, `request` a valid NUL-terminated string
// and `response` a valid pointer.
enum IfcMcpStatus ifc_mcp_handle_message(struct IfcMcpSession *session,
                                         const char *request,
                                         char **response);

// Calls a tool directly. `args_json` may be NULL for no arguments.
// `*result` receives the tool result, the tool error payload, or the
// schema violations, depending on the status.
//
// # Safety
// `session` must be a live handle, `name` a valid NUL-terminated string,
// `args_json` NULL or a valid NUL-terminated string, and `result` a valid
// pointer.
enum IfcMcpStatus ifc_mcp_call_tool(struct IfcMcpSession *session,
                                    const char *name,
                                    const char *args_json,
                                    char **result);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void ifc_mcp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IFC_MCP_H */
