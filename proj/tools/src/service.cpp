#include "brainergm/app/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "brainergm/app/engine.hpp"
#include "brainergm/errors.hpp"

namespace brainergm::app {

namespace {

enum class Status { queued, running, done, failed };

std::string_view to_string(Status s) {
  switch (s) {
    case Status::queued: return "queued";
    case Status::running: return "running";
    case Status::done: return "done";
    case Status::failed: return "failed";
  }
  return "failed";
}

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

/// A rejected request: HTTP status plus error class and message.
struct HttpError {
  int status;
  std::string error_class;
  std::string message;
  Document details = nullptr;
};

int status_for(ErrorClass c) {
  switch (c) {
    case ErrorClass::model: return 422;
    case ErrorClass::data:
    case ErrorClass::usage: return 400;
    default: return 500;
  }
}

struct Network {
  std::string id;
  std::string name;
  std::shared_ptr<const Inputs> inputs;
};

using Task = std::function<Document(RunSettings&)>;

struct Job {
  std::string id;
  std::string kind;
  Document request;
  std::string submitted;
  Task task;
  RunSettings settings;
  std::uint64_t budget = 1;

  // guarded by the store mutex
  Status status = Status::queued;
  std::string finished;
  std::string result;  // serialized once, then read-only
  std::string error_class;
  std::string error_message;

  std::atomic<bool> cancel{false};
  std::atomic<std::uint64_t> proposals{0};
};

const Document& field(const Document& body, const char* key) {
  static const Document null_value = nullptr;
  const auto it = body.find(key);
  return it == body.end() ? null_value : *it;
}

std::string string_field(const Document& body, const char* key, bool required) {
  const Document& v = field(body, key);
  if (v.is_null()) {
    if (required) throw HttpError{400, "data", std::string("schema violation: missing field '") + key + "'"};
    return {};
  }
  if (!v.is_string()) throw HttpError{400, "data", std::string("schema violation: field '") + key + "' must be a string"};
  return v.get<std::string>();
}

double number_field(const Document& body, const char* key, double fallback) {
  const Document& v = field(body, key);
  if (v.is_null()) return fallback;
  if (!v.is_number()) throw HttpError{400, "data", std::string("schema violation: field '") + key + "' must be a number"};
  return v.get<double>();
}

std::uint64_t count_field(const Document& body, const char* key, std::uint64_t fallback) {
  const Document& v = field(body, key);
  if (v.is_null()) return fallback;
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw HttpError{400, "data", std::string("schema violation: field '") + key + "' must be a non-negative integer"};
  return v.get<std::uint64_t>();
}

ModelSpec parse_terms(const std::string& terms, double tau, std::size_t n, const NodeAttributes* attrs) {
  ModelSpec m;
  try {
    m = ModelSpec::parse(terms, tau);
  } catch (const Error& e) {
    throw HttpError{422, std::string(brainergm::to_string(e.error_class())), e.what()};
  }
  const auto diags = validate_model(m, n, attrs);
  if (!diags.empty()) {
    Document list = Document::array();
    for (const auto& d : diags) list.push_back({{"code", d.code}, {"message", d.message}});
    throw HttpError{422, "model", "model '" + m.to_string() + "' failed validation: " + diags.front().message, list};
  }
  return m;
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;

  std::mutex mutex;
  std::condition_variable wake;
  bool stopping = false;
  std::map<std::string, Network> networks;
  std::vector<std::string> network_order;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::deque<std::shared_ptr<Job>> queue;
  std::size_t running = 0;
  std::uint64_t next_network = 1, next_job = 1;
  std::vector<std::thread> workers;

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    routes();
    for (std::size_t k = 0; k < std::max<std::size_t>(1, options.workers); ++k)
      workers.emplace_back([this] { work(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(mutex);
      stopping = true;
      for (auto& [id, job] : jobs) job->cancel = true;
    }
    wake.notify_all();
    server.stop();
    for (auto& t : workers) t.join();
  }

  // ---- responses ----------------------------------------------------------

  static void send(httplib::Response& res, int status, const Document& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
  }

  static void send_error(httplib::Response& res, const HttpError& e) {
    Document err = {{"class", e.error_class}, {"message", e.message}};
    if (!e.details.is_null()) err["details"] = e.details;
    send(res, e.status, Document{{"error", err}});
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const HttpError& e) {
      send_error(res, e);
    } catch (const Error& e) {
      send_error(res, {status_for(e.error_class()), std::string(brainergm::to_string(e.error_class())), e.what()});
    } catch (const std::exception& e) {
      send_error(res, {500, "internal", e.what()});
    }
  }

  static Document parse_body(const httplib::Request& req) {
    try {
      Document body = Document::parse(req.body);
      if (!body.is_object()) throw HttpError{400, "data", "schema violation: request body must be a JSON object"};
      return body;
    } catch (const Document::parse_error&) {
      throw HttpError{400, "data", "malformed JSON request body"};
    }
  }

  // must hold mutex
  Document job_json(const Job& j) const {
    double progress = 0.0;
    if (j.status == Status::done) progress = 1.0;
    else if (j.status == Status::running)
      progress = std::min(0.99, static_cast<double>(j.proposals.load()) / static_cast<double>(j.budget));
    Document d = {{"id", j.id},
                  {"kind", j.kind},
                  {"status", to_string(j.status)},
                  {"progress", progress},
                  {"submitted", j.submitted},
                  {"finished", j.finished.empty() ? Document(nullptr) : Document(j.finished)},
                  {"request", j.request},
                  {"error", nullptr},
                  {"result", nullptr}};
    if (j.status == Status::failed) d["error"] = {{"class", j.error_class}, {"message", j.error_message}};
    if (j.status == Status::done) d["result"] = "/v1/jobs/" + j.id + "/result";
    return d;
  }

  std::shared_ptr<const Inputs> network(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = networks.find(id);
    if (it == networks.end()) throw HttpError{404, "data", "unknown network '" + id + "'"};
    return it->second.inputs;
  }

  std::shared_ptr<Job> find_job(const std::string& id) {
    const auto it = jobs.find(id);
    if (it == jobs.end()) throw HttpError{404, "data", "unknown job '" + id + "'"};
    return it->second;
  }

  // ---- routes -------------------------------------------------------------

  void routes() {
    server.Post("/v1/networks", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_network(req, res); });
    });
    server.Get("/v1/networks", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::lock_guard lock(mutex);
        Document list = Document::array();
        for (const std::string& id : network_order) list.push_back(network_json(networks.at(id)));
        send(res, 200, Document{{"networks", list}});
      });
    });
    server.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_job(req, res); });
    });
    server.Get("/v1/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::lock_guard lock(mutex);
        send(res, 200, job_json(*find_job(req.path_params.at("id"))));
      });
    });
    server.Get("/v1/jobs/:id/result", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::lock_guard lock(mutex);
        const auto job = find_job(req.path_params.at("id"));
        if (job->status != Status::done)
          throw HttpError{409, "usage", "job '" + job->id + "' is " + std::string(to_string(job->status)) +
                                            "; no result is available"};
        res.status = 200;
        res.set_content(job->result, "application/json");
      });
    });
    server.Delete("/v1/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { cancel_job(req.path_params.at("id"), res); });
    });
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex);
      send(res, 200,
           Document{{"status", "ok"},
                    {"version", std::string(tool_version())},
                    {"schema_version", kSchemaVersion},
                    {"queue_depth", queue.size()},
                    {"running", running},
                    {"workers", workers.size()}});
    });
  }

  static Document network_json(const Network& n) {
    const Graph& g = n.inputs->graph;
    Document d = {{"id", n.id},
                  {"name", n.name},
                  {"n", g.node_count()},
                  {"m", g.edge_count()},
                  {"density", g.node_count() > 1 ? g.density() : 0.0},
                  {"attribute", n.inputs->attrs ? Document(n.inputs->attrs->name) : Document(nullptr)}};
    return d;
  }

  void post_network(const httplib::Request& req, httplib::Response& res) {
    std::string text, format_text = "auto", name, attributes;
    const std::string content_type = req.get_header_value("Content-Type");
    if (content_type.rfind("application/json", 0) == 0) {
      const Document body = parse_body(req);
      for (const auto& [key, v] : body.items())
        if (key != "data" && key != "format" && key != "name" && key != "attributes")
          throw HttpError{400, "data", "schema violation: unknown field '" + key + "'"};
      text = string_field(body, "data", true);
      if (body.contains("format")) format_text = string_field(body, "format", true);
      name = string_field(body, "name", false);
      attributes = string_field(body, "attributes", false);
    } else {
      text = req.body;
      if (req.has_param("format")) format_text = req.get_param_value("format");
      if (req.has_param("name")) name = req.get_param_value("name");
    }
    auto inputs = std::make_shared<Inputs>();
    std::vector<std::string> warnings;
    inputs->graph = parse_network(text, parse_network_format(format_text), &warnings);
    if (!attributes.empty()) inputs->attrs = parse_attributes(attributes, inputs->graph.node_count());

    Document out;
    {
      std::lock_guard lock(mutex);
      Network n{"net-" + std::to_string(next_network++), name, std::move(inputs)};
      out = network_json(n);
      network_order.push_back(n.id);
      networks.emplace(n.id, std::move(n));
    }
    out["warnings"] = warnings;
    send(res, 201, out);
  }

  void post_job(const httplib::Request& req, httplib::Response& res) {
    const Document body = parse_body(req);
    static const std::vector<std::string> known = {"kind",    "network_id", "terms", "tau",      "theta",
                                                   "control", "method",     "seed",  "fit_job",  "fit",
                                                   "nodes",   "alpha",      "strategy", "candidates"};
    for (const auto& [key, v] : body.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw HttpError{400, "data", "schema violation: unknown field '" + key + "'"};

    auto job = std::make_shared<Job>();
    job->kind = string_field(body, "kind", true);
    job->request = body;
    job->settings.seed = count_field(body, "seed", 1);
    try {
      apply_control(field(body, "control"), job->settings);
      (void)estimation_control(job->settings);
      (void)simulation_control(job->settings);
    } catch (const Error& e) {
      throw HttpError{400, "data", std::string("schema violation: ") + e.what()};
    }
    const double tau = number_field(body, "tau", kDefaultDecay);
    std::size_t models = 1;

    if (job->kind == "fit") {
      const auto in = network(string_field(body, "network_id", true));
      const ModelSpec model = parse_terms(string_field(body, "terms", true), tau, in->graph.node_count(),
                                          in->attributes());
      const std::string method = body.contains("method") ? string_field(body, "method", true) : "mcmc";
      FitMethod fm{};
      try {
        fm = parse_fit_method(method);
      } catch (const Error& e) {
        throw HttpError{400, "data", e.what()};
      }
      job->task = [in, model, fm](RunSettings& s) { return fit_document(run_fit(model, *in, fm, s)); };
    } else if (job->kind == "gof") {
      const auto in = network(string_field(body, "network_id", true));
      FitResult fit;
      if (body.contains("fit_job")) {
        const std::string id = string_field(body, "fit_job", true);
        std::lock_guard lock(mutex);
        const auto source = find_job(id);
        if (source->kind != "fit" || source->status != Status::done)
          throw HttpError{409, "usage", "job '" + id + "' is not a finished fit"};
        fit = fit_from_document(parse_document(source->result));
      } else if (body.contains("fit")) {
        fit = fit_from_document(field(body, "fit"));
      } else {
        throw HttpError{400, "data", "schema violation: gof jobs need 'fit_job' or 'fit'"};
      }
      parse_terms(fit.model.to_string(), tau, in->graph.node_count(), in->attributes());
      job->task = [in, fit](RunSettings& s) { return gof_plot_data(run_gof(fit, *in, s)); };
    } else if (job->kind == "simulate") {
      std::shared_ptr<const Inputs> in;
      if (body.contains("network_id")) in = network(string_field(body, "network_id", true));
      const std::size_t nodes = count_field(body, "nodes", in ? in->graph.node_count() : 0);
      if (nodes < 2) throw HttpError{400, "data", "schema violation: simulate needs 'nodes' >= 2 or a network"};
      const ModelSpec model = parse_terms(string_field(body, "terms", true), tau, nodes,
                                          in ? in->attributes() : nullptr);
      const Document& theta_json = field(body, "theta");
      if (!theta_json.is_array()) throw HttpError{400, "data", "schema violation: 'theta' must be an array"};
      StatVector theta;
      for (const auto& v : theta_json) {
        if (!v.is_number()) throw HttpError{400, "data", "schema violation: 'theta' must hold numbers"};
        theta.push_back(v.get<double>());
      }
      if (theta.size() != model.size())
        throw HttpError{422, "model", "theta has " + std::to_string(theta.size()) + " values but the model has " +
                                          std::to_string(model.size()) + " terms"};
      job->task = [in, model, theta, nodes](RunSettings& s) {
        return sample_document(run_simulate(model, theta, nodes, in ? in->attributes() : nullptr, s).summary);
      };
    } else if (job->kind == "select") {
      const auto in = network(string_field(body, "network_id", true));
      SelectRequest sr;
      sr.method = body.contains("method") ? string_field(body, "method", true) : "graphical";
      if (sr.method != "pvalue" && sr.method != "aic" && sr.method != "graphical")
        throw HttpError{400, "data", "schema violation: method must be pvalue, aic or graphical"};
      sr.tau = tau;
      sr.alpha = number_field(body, "alpha", 0.05);
      if (body.contains("strategy")) {
        try {
          sr.strategy = parse_aic_strategy(string_field(body, "strategy", true));
        } catch (const Error& e) {
          throw HttpError{400, "data", e.what()};
        }
      }
      if (body.contains("candidates")) {
        sr.candidates = string_field(body, "candidates", true);
        if (sr.method != "graphical") parse_terms(*sr.candidates, tau, in->graph.node_count(), in->attributes());
      }
      models = sr.method == "graphical" ? 32 : 8;
      job->task = [in, sr](RunSettings& s) { return selection_document(run_select(sr, *in, s)); };
    } else {
      throw HttpError{400, "data", "schema violation: kind must be fit, gof, simulate or select"};
    }
    job->budget = std::max<std::uint64_t>(1, proposal_budget(job->kind, job->settings, models));
    job->settings.hooks.cancel = &job->cancel;
    job->settings.hooks.proposals = &job->proposals;

    Document out;
    {
      std::lock_guard lock(mutex);
      job->id = "job-" + std::to_string(next_job++);
      job->submitted = now_utc();
      jobs.emplace(job->id, job);
      queue.push_back(job);
      out = job_json(*job);
    }
    wake.notify_one();
    res.set_header("Location", "/v1/jobs/" + out["id"].get<std::string>());
    send(res, 202, out);
  }

  void cancel_job(const std::string& id, httplib::Response& res) {
    std::lock_guard lock(mutex);
    const auto job = find_job(id);
    if (job->status == Status::done || job->status == Status::failed)
      throw HttpError{409, "usage", "job '" + id + "' has already finished"};
    job->cancel = true;
    if (job->status == Status::queued) {
      queue.erase(std::find(queue.begin(), queue.end(), job));
      finish_failed(*job, "cancelled", "job cancelled");
      send(res, 200, job_json(*job));
      return;
    }
    send(res, 202, job_json(*job));  // running: the worker stops at its next check
  }

  // must hold mutex
  static void finish_failed(Job& job, std::string cls, std::string message) {
    job.status = Status::failed;
    job.error_class = std::move(cls);
    job.error_message = std::move(message);
    job.finished = now_utc();
    job.task = nullptr;
  }

  // ---- workers ------------------------------------------------------------

  void work() {
    while (true) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mutex);
        wake.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = queue.front();
        queue.pop_front();
        job->status = Status::running;
        ++running;
      }
      std::string result, cls, message;
      try {
        result = dump_document(job->task(job->settings));
      } catch (const Error& e) {
        cls = brainergm::to_string(e.error_class());
        message = e.what();
      } catch (const std::exception& e) {
        cls = "internal";
        message = e.what();
      }
      std::lock_guard lock(mutex);
      --running;
      if (job->cancel) {
        finish_failed(*job, "cancelled", "job cancelled");
      } else if (!cls.empty()) {
        finish_failed(*job, cls, message);
      } else {
        job->result = std::move(result);
        job->status = Status::done;
        job->finished = now_utc();
        job->task = nullptr;
        if (options.data_dir) persist(*job);
      }
    }
  }

  void persist(const Job& job) const {
    try {
      std::filesystem::create_directories(*options.data_dir);
      std::ofstream(*options.data_dir / (job.id + ".json"), std::ios::binary) << job.result;
    } catch (const std::exception&) {
      // persistence is best effort; the in-memory result stays authoritative
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace brainergm::app
