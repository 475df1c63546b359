#include "causalforge/service.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include <httplib.h>

namespace causalforge {

namespace {

constexpr const char *kJson = "application/json";

Json error_body(std::string_view code, const std::string &message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

void reply(httplib::Response &res, int status, const Json &body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response &res, int status, std::string_view code, const std::string &message) {
  reply(res, status, error_body(code, message));
}

std::optional<Json> parse_body(const httplib::Request &req, httplib::Response &res) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error &e) {
    reply_error(res, 400, "FormatError", std::string("malformed JSON body: ") + e.what());
    return std::nullopt;
  }
}

std::string strip_code(const Error &e) {
  const std::string what = e.what();
  const std::string prefix = std::string(e.code_name()) + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

// Thrown from the progress sink to abandon a running task on shutdown. Not
// an Error, so the pipeline does not wrap it.
struct ShuttingDown {};

TaskState parse_state(std::string_view s) {
  if (s == "queued") return TaskState::kQueued;
  if (s == "running") return TaskState::kRunning;
  if (s == "done") return TaskState::kDone;
  if (s == "failed") return TaskState::kFailed;
  throw Error(ErrorCode::kFormatError, "unknown task state '" + std::string(s) + "'");
}

} // namespace

std::string_view task_state_name(TaskState state) {
  switch (state) {
  case TaskState::kQueued:
    return "queued";
  case TaskState::kRunning:
    return "running";
  case TaskState::kDone:
    return "done";
  case TaskState::kFailed:
    return "failed";
  }
  return "unknown";
}

Json task_record_to_json(const TaskRecord &record, bool summary) {
  Json out = {{"id", record.id},
              {"state", task_state_name(record.state)},
              {"algorithm", algorithm_name(record.config.algorithm)},
              {"parent_id", record.config.parent_id ? Json(*record.config.parent_id) : Json(nullptr)},
              {"progress", record.progress ? trace_to_json(*record.progress) : Json(nullptr)}};
  if (record.error) out["error"] = *record.error;
  if (summary) return out;
  out["config"] = task_config_to_json(record.config);
  out["has_result"] = record.result.has_value();
  return out;
}

// TaskService -------------------------------------------------------------------

TaskService::TaskService(Options options) : data_dir_(std::move(options.data_dir)) {
  if (!data_dir_) {
    if (const char *env = std::getenv("CAUSALFORGE_DATA_DIR"); env && *env) data_dir_ = env;
  }
  if (data_dir_) {
    std::filesystem::create_directories(*data_dir_);
    load_persisted();
  }
  int n = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  for (int i = 0; i < n; ++i) threads_.emplace_back([this] { worker_loop(); });
}

TaskService::~TaskService() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  for (auto &t : threads_) t.join();
}

std::string TaskService::next_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task-%06ld", ++counter_);
  return buf;
}

std::string TaskService::submit(TaskConfig config) {
  config.validate();
  std::lock_guard lock(mutex_);
  TaskRecord record;
  record.id = next_id();
  record.config = std::move(config);
  const std::string id = record.id;
  records_.emplace(id, std::move(record));
  order_.push_back(id);
  queue_.push_back(id);
  changed_.notify_all();
  return id;
}

std::optional<TaskRecord> TaskService::get(const std::string &id) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<TaskRecord> TaskService::list() const {
  std::lock_guard lock(mutex_);
  std::vector<TaskRecord> out;
  out.reserve(order_.size());
  for (const auto &id : order_) out.push_back(records_.at(id));
  return out;
}

TaskService::Outcome TaskService::annotate(const std::string &parent_id, const PriorKnowledge &delta,
                                           std::string &new_id) {
  TaskConfig config;
  {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(parent_id);
    if (it == records_.end()) return Outcome::kNotFound;
    const TaskState s = it->second.state;
    if (s != TaskState::kDone && s != TaskState::kFailed) return Outcome::kConflict;
    config = it->second.config;
  }
  config.prior = config.prior.merged(delta);
  config.parent_id = parent_id;
  new_id = submit(std::move(config));
  return Outcome::kOk;
}

TaskService::Outcome TaskService::remove(const std::string &id) {
  std::filesystem::path file;
  {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(id);
    if (it == records_.end()) return Outcome::kNotFound;
    if (it->second.state == TaskState::kRunning) return Outcome::kConflict;
    records_.erase(it);
    std::erase(order_, id);
    std::erase(queue_, id);
    if (data_dir_) file = *data_dir_ / (id + ".json");
  }
  changed_.notify_all();
  if (!file.empty()) {
    std::error_code ec;
    std::filesystem::remove(file, ec);
  }
  return Outcome::kOk;
}

bool TaskService::wait(const std::string &id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [&] {
    const auto it = records_.find(id);
    return it == records_.end() || it->second.state == TaskState::kDone || it->second.state == TaskState::kFailed;
  });
}

void TaskService::worker_loop() {
  while (true) {
    std::string id;
    TaskConfig config;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      auto &record = records_.at(id);
      record.state = TaskState::kRunning;
      config = record.config;
    }
    changed_.notify_all();

    auto progress = [&](const TraceEntry &entry) {
      std::lock_guard lock(mutex_);
      if (stopping_) throw ShuttingDown{};
      if (auto it = records_.find(id); it != records_.end()) it->second.progress = entry;
    };

    std::optional<Json> result;
    std::optional<Json> error;
    try {
      result = task_result_to_json(run_task(config, progress));
    } catch (const ShuttingDown &) {
      return;
    } catch (const TaskError &e) {
      error = Json{{"code", e.code_name()}, {"message", strip_code(e)}, {"stage", e.stage()},
                   {"partial", e.partial()}};
    } catch (const Error &e) {
      error = Json{{"code", e.code_name()}, {"message", strip_code(e)}};
    } catch (const std::exception &e) {
      error = Json{{"code", "InternalError"}, {"message", e.what()}};
    }

    std::optional<TaskRecord> finished;
    {
      std::lock_guard lock(mutex_);
      if (auto it = records_.find(id); it != records_.end()) {
        it->second.state = result ? TaskState::kDone : TaskState::kFailed;
        it->second.result = std::move(result);
        it->second.error = std::move(error);
        finished = it->second;
      }
    }
    if (finished) persist(*finished);
    changed_.notify_all();
  }
}

void TaskService::persist(const TaskRecord &record) const {
  if (!data_dir_) return;
  Json out = task_record_to_json(record, false);
  if (record.result) out["result"] = *record.result;
  try {
    write_json_file(*data_dir_ / (record.id + ".json"), out);
  } catch (const std::exception &) {
  }
}

void TaskService::load_persisted() {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(*data_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto &path : files) {
    try {
      const Json j = read_json_file(path);
      TaskRecord record;
      record.id = j.at("id").get<std::string>();
      record.state = parse_state(j.at("state").get<std::string>());
      if (record.state != TaskState::kDone && record.state != TaskState::kFailed) continue;
      record.config = task_config_from_json(j.at("config"));
      if (j.contains("result")) record.result = j["result"];
      if (j.contains("error")) record.error = j["error"];
      if (record.state == TaskState::kDone && !record.result) continue;
      long number = 0;
      if (std::sscanf(record.id.c_str(), "task-%ld", &number) == 1) counter_ = std::max(counter_, number);
      order_.push_back(record.id);
      records_.emplace(record.id, std::move(record));
    } catch (const std::exception &) {
    }
  }
}

// HttpServer --------------------------------------------------------------------

struct HttpServer::Impl {
  TaskService &service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(TaskService &s) : service(s) {}
};

HttpServer::HttpServer(TaskService &service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto &svr = impl_->server;
  TaskService &tasks = service;

  svr.Get("/api/health", [&tasks](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, {{"status", "ok"}, {"workers", tasks.workers()}, {"schema_version", kSchemaVersion}});
  });

  svr.Post("/api/tasks", [&tasks](const httplib::Request &req, httplib::Response &res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    try {
      const std::string id = tasks.submit(task_config_from_json(*body));
      reply(res, 202, {{"id", id}});
    } catch (const Error &e) {
      reply_error(res, 400, e.code_name(), strip_code(e));
    }
  });

  svr.Get("/api/tasks", [&tasks](const httplib::Request &, httplib::Response &res) {
    Json out = Json::array();
    for (const auto &record : tasks.list()) out.push_back(task_record_to_json(record, true));
    reply(res, 200, out);
  });

  svr.Get(R"(/api/tasks/([A-Za-z0-9_-]+))", [&tasks](const httplib::Request &req, httplib::Response &res) {
    const auto record = tasks.get(req.matches[1]);
    if (!record) return reply_error(res, 404, "NotFound", "unknown task id");
    reply(res, 200, task_record_to_json(*record, false));
  });

  svr.Get(R"(/api/tasks/([A-Za-z0-9_-]+)/result)", [&tasks](const httplib::Request &req, httplib::Response &res) {
    const auto record = tasks.get(req.matches[1]);
    if (!record) return reply_error(res, 404, "NotFound", "unknown task id");
    if (!record->result) return reply_error(res, 404, "NotReady", "task has no result yet");
    reply(res, 200, *record->result);
  });

  svr.Post(R"(/api/tasks/([A-Za-z0-9_-]+)/annotations)",
           [&tasks](const httplib::Request &req, httplib::Response &res) {
             const auto body = parse_body(req, res);
             if (!body) return;
             try {
               std::string id;
               switch (tasks.annotate(req.matches[1], prior_from_json(*body), id)) {
               case TaskService::Outcome::kNotFound:
                 return reply_error(res, 404, "NotFound", "unknown task id");
               case TaskService::Outcome::kConflict:
                 return reply_error(res, 409, "InvalidState", "task has not finished");
               case TaskService::Outcome::kOk:
                 return reply(res, 202, {{"id", id}, {"parent_id", std::string(req.matches[1])}});
               }
             } catch (const Error &e) {
               reply_error(res, 400, e.code_name(), strip_code(e));
             }
           });

  svr.Delete(R"(/api/tasks/([A-Za-z0-9_-]+))", [&tasks](const httplib::Request &req, httplib::Response &res) {
    const std::string id = req.matches[1];
    switch (tasks.remove(id)) {
    case TaskService::Outcome::kNotFound:
      return reply_error(res, 404, "NotFound", "unknown task id");
    case TaskService::Outcome::kConflict:
      return reply_error(res, 409, "InvalidState", "a running task cannot be deleted");
    case TaskService::Outcome::kOk:
      return reply(res, 200, {{"id", id}, {"deleted", true}});
    }
  });

  svr.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (res.body.empty()) {
      const bool not_found = res.status == 404;
      reply_error(res, res.status, not_found ? "NotFound" : "HttpError",
                  not_found ? "no such resource" : "request failed");
    }
  });

  if (static_dir) svr.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
  auto &svr = impl_->server;
  if (port == 0) return svr.bind_to_any_port(host);
  if (!svr.bind_to_port(host, port)) return -1;
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

} // namespace causalforge
