#pragma once

#include <string>

#include "dime/service/session.hpp"

namespace httplib {
class Server;
}

namespace dime {

// Mounts the session API on `server`:
//   POST /sessions                        -> {"id": ...}
//   GET  /sessions/{id}                   -> snapshot
//   GET  /sessions/{id}/recommendation    -> action + rationale
//   POST /sessions/{id}/observation       -> next status
//   GET  /sessions/{id}/export            -> episode record
// Errors map to 400 (validation / parse), 404 (unknown id), 409 (status).
void mount_session_api(httplib::Server& server, SessionStore& store);

}  // namespace dime
