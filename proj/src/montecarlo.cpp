// SPDX-License-Identifier: Apache-2.0
//
// userdet - blind new-user detection for DS/CDMA over doubly-dispersive channels
// Copyright (C) 2026 The userdet authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "userdet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace userdet
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string &s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t t : tags)
        h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ull));
    return h;
}

double quantile_type7(std::vector<double> sample, double prob)
{
    if (sample.empty())
        throw ParameterError("quantile: empty sample");
    if (!(prob >= 0.0 && prob <= 1.0))
        throw ParameterError("quantile: probability must lie in [0, 1]");
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || sample[lo] == sample[hi])
        return sample[lo];
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

RateEstimate wilson_interval(long successes, long trials)
{
    if (trials < 1 || successes < 0 || successes > trials)
        throw ParameterError("wilson_interval: need 0 <= successes <= trials, trials >= 1");
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    RateEstimate r;
    r.successes = successes;
    r.trials = trials;
    r.rate = p;
    r.lo = std::clamp(centre - half, 0.0, p);
    r.hi = std::clamp(centre + half, p, 1.0);
    return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ParameterError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size())
    {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // Kolmogorov distribution tail with the Stephens small-sample correction.
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
    {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12)
            break;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

int default_threads()
{
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(long n, int threads, const std::function<void(long)> &fn)
{
    if (n <= 0)
        return;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long>(n, 1024))));
    if (threads == 1)
    {
        for (long i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]
        {
            for (;;)
            {
                const long i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                }
            }
        });
    for (auto &th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

double calibrate_threshold(const IndexedStatistic &stat, long n_trials, double target_pfa, int threads)
{
    if (!(target_pfa > 0.0 && target_pfa < 1.0))
        throw ParameterError("calibrate_threshold: target_pfa must lie in (0, 1)");
    if (static_cast<double>(n_trials) < 10.0 / target_pfa - 1e-9)
        throw ParameterError("calibrate_threshold: need at least 10 / target_pfa calibration trials");
    std::vector<double> sample(static_cast<std::size_t>(n_trials));
    parallel_for(n_trials, threads, [&](long i) { sample[static_cast<std::size_t>(i)] = stat(i); });
    return quantile_type7(std::move(sample), 1.0 - target_pfa);
}

RateEstimate estimate_rate(const IndexedStatistic &stat, double threshold, long n_trials, int threads)
{
    if (n_trials < 1)
        throw ParameterError("estimate_rate: n_trials must be >= 1");
    std::vector<char> hit(static_cast<std::size_t>(n_trials), 0);
    parallel_for(n_trials, threads, [&](long i) { hit[static_cast<std::size_t>(i)] = stat(i) > threshold; });
    long count = 0;
    for (char h : hit)
        count += h;
    return wilson_interval(count, n_trials);
}

double estimate_log_te_max(std::span<const ComplexMatrix> covariances, const CodeGeometry &geometry, double safety)
{
    if (covariances.empty())
        throw ParameterError("estimate_Te_max: empty ensemble");
    if (!(safety > 0.0))
        throw ParameterError("estimate_Te_max: safety factor must be positive");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &M : covariances)
        best = std::max(best, log_covariance_factor(M, geometry));
    return best + std::log(safety);
}

TrialBatch run_trials(const ScenarioModel &model, const BatchRequest &request)
{
    TrialBatch batch;
    const auto n = static_cast<std::size_t>(request.trials);
    batch.stats.assign(request.detectors.size(), std::vector<double>(n));
    if (request.record_log_te)
        batch.log_te.assign(n, 0.0);

    bool need_cov = request.record_log_te;
    for (DetectorId d : request.detectors)
        need_cov = need_cov || needs_covariances(d);

    parallel_for(request.trials, request.threads, [&](long i)
    {
        std::mt19937_64 rng(derive_seed(request.stream_seed, {static_cast<std::uint64_t>(i)}));
        std::optional<ScenarioModel> own;
        const ScenarioModel *m = &model;
        if (request.code_redraw)
        {
            ScenarioConfig cfg = model.config();
            cfg.codes = request.code_redraw(rng);
            own.emplace(std::move(cfg));
            m = &*own;
        }
        const Trial trial = m->simulate(rng, request.fixed_delays);
        std::optional<GenieCovariances> cov;
        if (need_cov)
            cov = m->covariances(trial.realization);

        DetectorContext ctx;
        ctx.data = &trial.data;
        ctx.geometry = &m->geometry();
        ctx.covariances = cov ? &*cov : nullptr;
        ctx.log_te_max = request.log_te_max;

        std::optional<double> log_t;
        for (std::size_t d = 0; d < request.detectors.size(); ++d)
        {
            const DetectorId id = request.detectors[d];
            double v;
            if ((id == DetectorId::Mglrt || id == DetectorId::Normalized) && log_t)
                v = id == DetectorId::Mglrt ? *log_t : log_normalized_statistic(*log_t, *request.log_te_max);
            else
                v = evaluate(id, ctx).statistic;
            if (id == DetectorId::Mglrt)
                log_t = v;
            batch.stats[d][static_cast<std::size_t>(i)] = v;
        }
        if (request.record_log_te)
            batch.log_te[static_cast<std::size_t>(i)] = log_covariance_factor(cov->interference, m->geometry());
    });
    return batch;
}

namespace
{

std::string fmt_num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string ScenarioKnobs::family() const
{
    return "snr_db=" + fmt_num(snr_db) + ";sir_db=" + fmt_num(sir_db) + ";fd=" + fmt_num(fd) +
           ";alpha=" + fmt_num(alpha) + ";k_users=" + std::to_string(users) + ";mode=" + to_string(mode);
}

std::string ScenarioKnobs::key() const { return family() + ";q_active=" + std::to_string(active_windows); }

SystemParams ScenarioKnobs::apply(SystemParams base) const
{
    base.snr = db_to_linear(snr_db);
    base.sir = db_to_linear(sir_db);
    base.doppler = fd;
    base.rolloff = alpha;
    base.users = users;
    base.active_windows = active_windows;
    return base;
}

const ThresholdEntry *ThresholdTable::find(const std::string &detector, const std::string &family) const
{
    for (const auto &e : entries)
        if (e.detector == detector && e.family == family)
            return &e;
    return nullptr;
}

void ThresholdTable::upsert(ThresholdEntry entry)
{
    for (auto &e : entries)
        if (e.detector == entry.detector && e.family == entry.family)
        {
            e = std::move(entry);
            return;
        }
    entries.push_back(std::move(entry));
}

std::vector<ScenarioKnobs> SweepSpec::grid() const
{
    std::vector<ScenarioKnobs> out;
    for (int k : users)
        for (double f : fd)
            for (double a : alpha)
                for (double s : sir_db)
                    for (int qa : active_windows)
                        for (double snr : snr_db)
                        {
                            ScenarioKnobs kn;
                            kn.snr_db = snr;
                            kn.sir_db = s;
                            kn.fd = f;
                            kn.alpha = a;
                            kn.users = k;
                            kn.active_windows = qa;
                            kn.mode = mode;
                            out.push_back(kn);
                        }
    return out;
}

void SweepSpec::validate() const
{
    if (snr_db.empty() || sir_db.empty() || fd.empty() || alpha.empty() || users.empty() ||
        active_windows.empty() || detectors.empty())
        throw ParameterError("sweep: every grid axis and the detector list must be nonempty");
    if (trials < 1)
        throw ParameterError("sweep: trials must be >= 1");
    if (!(target_pfa > 0.0 && target_pfa < 1.0))
        throw ParameterError("sweep: target_pfa must lie in (0, 1)");
    if (static_cast<double>(calibration_trials) < 10.0 / target_pfa - 1e-9)
        throw ParameterError("sweep: calibration_trials must be >= 10 / target_pfa");
    const int max_users = *std::max_element(users.begin(), users.end());
    if (!redraw_codes && codes.size() < static_cast<std::size_t>(max_users))
        throw ParameterError("sweep: fewer spreading codes than the largest user count");
    for (const auto &kn : grid())
        kn.apply(base).validate();
}

std::vector<SpreadingCode> draw_codes(int users, int processing_gain, std::mt19937_64 &rng, bool force_random)
{
    std::vector<SpreadingCode> codes;
    const int degree = force_random ? 0 : mseq_degree_for_length(processing_gain);
    if (degree > 0)
    {
        const auto states = static_cast<std::uint32_t>(processing_gain);
        if (static_cast<std::uint32_t>(users) > states)
            throw ParameterError("draw_codes: more users than distinct m-sequence shifts");
        std::vector<std::uint32_t> pool(states);
        for (std::uint32_t s = 0; s < states; ++s)
            pool[s] = s + 1;
        for (int k = 0; k < users; ++k)
        {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), pool.size() - 1);
            std::swap(pool[static_cast<std::size_t>(k)], pool[pick(rng)]);
            codes.push_back(gen_mseq(degree, pool[static_cast<std::size_t>(k)]));
        }
        return codes;
    }
    for (int k = 0; k < users; ++k)
        codes.push_back(random_code(processing_gain, rng));
    return codes;
}

std::vector<SpreadingCode> draw_codes(int users, int processing_gain, std::uint64_t master_seed, bool force_random)
{
    std::mt19937_64 rng(derive_seed(master_seed, {static_cast<std::uint64_t>(StreamPurpose::Codes)}));
    return draw_codes(users, processing_gain, rng, force_random);
}

ScenarioModel make_model(const SweepSpec &spec, const ScenarioKnobs &knobs, Hypothesis h)
{
    ScenarioConfig cfg;
    cfg.params = knobs.apply(spec.base);
    if (h == Hypothesis::H0)
        cfg.params.active_windows = cfg.params.windows;
    cfg.hypothesis = h;
    cfg.mode = knobs.mode;
    cfg.fine_per_chip = spec.fine_per_chip;
    if (spec.redraw_codes)
        cfg.codes = draw_codes(knobs.users, spec.base.processing_gain, spec.seed, false);
    else
        cfg.codes.assign(spec.codes.begin(), spec.codes.begin() + knobs.users);
    return ScenarioModel(std::move(cfg));
}

namespace
{

std::function<std::vector<SpreadingCode>(std::mt19937_64 &)> code_redraw_for(const SweepSpec &spec, int users)
{
    if (!spec.redraw_codes)
        return {};
    const int n = spec.base.processing_gain;
    return [users, n](std::mt19937_64 &rng) { return draw_codes(users, n, rng, false); };
}

} // namespace

void calibrate_table(const SweepSpec &spec, ThresholdTable &table, int threads)
{
    spec.validate();
    table.target_pfa = spec.target_pfa;
    table.seed = spec.seed;
    std::set<std::string> seen;
    for (const auto &kn : spec.grid())
    {
        const std::string family = kn.family();
        if (!seen.insert(family).second)
            continue;

        // The normalized detector is calibrated on T_CFAR; its Te_max is the
        // worst T_e seen over the same H0 realizations.
        std::vector<DetectorId> batch_ids;
        bool want_te = false;
        for (DetectorId d : spec.detectors)
        {
            if (table.find(to_string(d), family))
                continue;
            const DetectorId run_as = d == DetectorId::Normalized ? DetectorId::Cfar : d;
            want_te = want_te || d == DetectorId::Normalized;
            if (std::find(batch_ids.begin(), batch_ids.end(), run_as) == batch_ids.end())
                batch_ids.push_back(run_as);
        }
        if (batch_ids.empty())
            continue;

        const ScenarioModel model = make_model(spec, kn, Hypothesis::H0);
        BatchRequest req;
        req.detectors = batch_ids;
        req.stream_seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(StreamPurpose::Calibration), fnv1a64(family)});
        req.trials = spec.calibration_trials;
        req.threads = threads;
        req.record_log_te = want_te;
        req.code_redraw = code_redraw_for(spec, kn.users);
        const TrialBatch batch = run_trials(model, req);

        for (DetectorId d : spec.detectors)
        {
            if (table.find(to_string(d), family))
                continue;
            const DetectorId run_as = d == DetectorId::Normalized ? DetectorId::Cfar : d;
            const auto idx = static_cast<std::size_t>(
                std::find(batch_ids.begin(), batch_ids.end(), run_as) - batch_ids.begin());
            ThresholdEntry e;
            e.detector = to_string(d);
            e.family = family;
            e.threshold = quantile_type7(batch.stats[idx], 1.0 - spec.target_pfa);
            e.n_calibration_trials = spec.calibration_trials;
            if (d == DetectorId::Normalized)
                e.log_te_max = *std::max_element(batch.log_te.begin(), batch.log_te.end()) +
                               std::log(spec.te_max_safety);
            table.upsert(std::move(e));
        }
    }
}

std::vector<CurveRecord> run_sweep(const SweepSpec &spec, const ThresholdTable &table, int threads,
                                   const RecordSink &sink, const std::set<std::string> &done)
{
    spec.validate();
    std::vector<CurveRecord> out;
    const std::string fingerprint = spec.redraw_codes ? "redrawn-per-trial" : code_fingerprint(spec.codes);
    for (const auto &kn : spec.grid())
    {
        if (done.count(kn.key()))
            continue;
        const std::string family = kn.family();
        std::vector<const ThresholdEntry *> entries;
        std::optional<double> log_te_max;
        for (DetectorId d : spec.detectors)
        {
            const ThresholdEntry *e = table.find(to_string(d), family);
            if (!e)
                throw ParameterError("no threshold for detector '" + to_string(d) + "' in family " + family);
            if (d == DetectorId::Normalized)
            {
                if (!e->log_te_max)
                    throw ParameterError("threshold entry for 'normalized' lacks Te_max (family " + family + ")");
                log_te_max = e->log_te_max;
            }
            entries.push_back(e);
        }

        const ScenarioModel model = make_model(spec, kn, Hypothesis::H1);
        BatchRequest req;
        req.detectors = spec.detectors;
        req.stream_seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(StreamPurpose::Rate), fnv1a64(kn.key())});
        req.trials = spec.trials;
        req.threads = threads;
        req.log_te_max = log_te_max;
        req.code_redraw = code_redraw_for(spec, kn.users);
        const TrialBatch batch = run_trials(model, req);

        for (std::size_t d = 0; d < spec.detectors.size(); ++d)
        {
            long hits = 0;
            for (double v : batch.stats[d])
                hits += v > entries[d]->threshold;
            const RateEstimate est = wilson_interval(hits, spec.trials);
            CurveRecord r;
            r.detector = to_string(spec.detectors[d]);
            r.knobs = kn;
            r.threshold = entries[d]->threshold;
            r.rate = est.rate;
            r.ci_lo = est.lo;
            r.ci_hi = est.hi;
            r.trials = spec.trials;
            r.seed = spec.seed;
            r.code_fingerprint = fingerprint;
            if (sink)
                sink(r);
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace userdet
