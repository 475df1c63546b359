#pragma once

#include <condition_variable>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "causalforge/io.hpp"
#include "causalforge/pipeline.hpp"

namespace causalforge {

enum class TaskState { kQueued, kRunning, kDone, kFailed };

std::string_view task_state_name(TaskState state);

/// Immutable snapshot of one task. `result` is the serialized TaskResult and
/// is present exactly when the state is done; `error` only when failed.
struct TaskRecord {
  std::string id;
  TaskState state = TaskState::kQueued;
  TaskConfig config;
  std::optional<Json> result;
  std::optional<Json> error;
  std::optional<TraceEntry> progress;
};

Json task_record_to_json(const TaskRecord &record, bool summary);

/// FIFO task queue drained by a fixed pool of workers. Completed and failed
/// records are written as one JSON file per task into the data directory,
/// when one is configured, and reloaded on construction.
class TaskService {
public:
  struct Options {
    int workers = 0; ///< 0 picks the number of hardware threads
    std::optional<std::filesystem::path> data_dir;
  };

  /// Reads CAUSALFORGE_DATA_DIR when `data_dir` is unset.
  explicit TaskService(Options options);
  ~TaskService();

  TaskService(const TaskService &) = delete;
  TaskService &operator=(const TaskService &) = delete;

  /// Validates and enqueues; throws Error on an invalid config.
  std::string submit(TaskConfig config);

  std::optional<TaskRecord> get(const std::string &id) const;
  std::vector<TaskRecord> list() const;

  enum class Outcome { kOk, kNotFound, kConflict };

  /// Enqueue a rerun of `parent_id` with the parent prior merged with
  /// `delta`. Throws PriorConflict when the merge is contradictory; the
  /// parent must have finished.
  Outcome annotate(const std::string &parent_id, const PriorKnowledge &delta, std::string &new_id);

  /// Removes a queued or finished task. Running tasks cannot be removed.
  Outcome remove(const std::string &id);

  /// Blocks until the task finishes or the timeout passes; true if finished.
  bool wait(const std::string &id, std::chrono::milliseconds timeout) const;

  int workers() const noexcept { return static_cast<int>(threads_.size()); }
  const std::optional<std::filesystem::path> &data_dir() const noexcept { return data_dir_; }

private:
  void worker_loop();
  void load_persisted();
  void persist(const TaskRecord &record) const;
  std::string next_id();

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, TaskRecord> records_;
  std::vector<std::string> order_;
  std::deque<std::string> queue_;
  std::vector<std::thread> threads_;
  std::optional<std::filesystem::path> data_dir_;
  long counter_ = 0;
  bool stopping_ = false;
};

/// HTTP front end for a TaskService, optionally serving static files under /.
class HttpServer {
public:
  HttpServer(TaskService &service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer &) = delete;
  HttpServer &operator=(const HttpServer &) = delete;

  /// Binds to `port` (0 picks a free port) and returns the bound port.
  int bind(const std::string &host, int port);
  /// Serves until stop() is called.
  void listen();
  void start();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace causalforge
