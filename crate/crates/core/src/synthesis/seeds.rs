//! A deterministic seed corpus for offline runs.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SeedPair;
use crate::tool::{ParameterSpec, ToolSpec};

pub struct Domain {
    pub tag: &'static str,
    pub objects: [&'static str; 3],
    pub params: &'static [(&'static str, &'static str)],
    pub returns: &'static [(&'static str, &'static str)],
}

const ACTIONS: [(&str, &str); 6] = [
    ("book", "Book"),
    ("search", "Search for"),
    ("cancel", "Cancel"),
    ("check", "Check the status of"),
    ("update", "Update"),
    ("compare", "Compare"),
];

macro_rules! domain {
    ($tag:literal, [$($o:literal),+], [$($p:literal => $pd:literal),+], [$($r:literal => $rd:literal),+]) => {
        Domain {
            tag: $tag,
            objects: [$($o),+],
            params: &[$(($p, $pd)),+],
            returns: &[$(($r, $rd)),+],
        }
    };
}

pub const DOMAINS: [Domain; 22] = [
    domain!("travel", ["flight", "hotel_room", "car_rental"],
        ["departure_city" => "City of departure", "arrival_city" => "City of arrival", "travel_date" => "Date of travel", "passenger_name" => "Name of the passenger", "seat_class" => "Cabin or room class", "booking_code" => "Reservation code"],
        ["status" => "Booking status", "confirmation_number" => "Confirmation number", "total_price" => "Total price", "itinerary" => "Itinerary details"]),
    domain!("dining", ["restaurant_table", "food_delivery", "catering_order"],
        ["restaurant_name" => "Name of the restaurant", "party_size" => "Number of guests", "reservation_time" => "Time of the reservation", "cuisine_type" => "Preferred cuisine", "delivery_address" => "Delivery address", "dietary_note" => "Dietary restrictions"],
        ["status" => "Order status", "order_id" => "Order identifier", "estimated_time" => "Estimated ready time", "cuisines" => "Cuisines offered"]),
    domain!("finance", ["bank_transfer", "savings_bond", "credit_report"],
        ["account_number" => "Account number", "amount" => "Amount of money", "currency" => "Currency code", "recipient_name" => "Name of the recipient", "bond_term" => "Term in months", "keyword" => "Search keyword"],
        ["transaction_id" => "Transaction identifier", "balance" => "Remaining balance", "credit_score" => "Credit score", "status" => "Operation status"]),
    domain!("health", ["doctor_appointment", "prescription_refill", "lab_result"],
        ["patient_name" => "Name of the patient", "doctor_name" => "Name of the doctor", "clinic_location" => "Clinic location", "appointment_date" => "Date of the appointment", "medication" => "Medication name", "insurance_code" => "Insurance code"],
        ["appointment_id" => "Appointment identifier", "status" => "Request status", "result_summary" => "Summary of results", "next_steps" => "Recommended next steps"]),
    domain!("home_repair", ["appliance_repair", "plumbing_service", "electrician_visit"],
        ["appliance_type" => "Type of appliance", "brand" => "Brand name", "model_number" => "Model number", "issue" => "Issue description", "service_address" => "Service address", "appointment_time" => "Service time"],
        ["request_status" => "Request status", "service_id" => "Service identifier", "technician" => "Assigned technician", "cost_estimate" => "Estimated cost"]),
    domain!("calendar", ["meeting", "event_reminder", "room_booking"],
        ["event_title" => "Title of the event", "event_date" => "Date of the event", "start_time" => "Start time", "end_time" => "End time", "venue" => "Venue of the event", "attendee_email" => "Attendee email"],
        ["status" => "Scheduling status", "event_id" => "Event identifier", "reminder_set" => "Whether a reminder was set"]),
    domain!("real_estate", ["apartment_listing", "property_valuation", "rental_contract"],
        ["location" => "Geographic location of the property", "price_range" => "Price range", "area_range" => "Area range", "property_type" => "Type of property", "bedrooms" => "Number of bedrooms", "listing_code" => "Listing code"],
        ["listings" => "Matching properties", "valuation" => "Estimated value", "comparison" => "Comparison with market", "status" => "Contract status"]),
    domain!("jobs", ["job_posting", "job_application", "interview_slot"],
        ["job_title" => "Job title", "industry" => "Industry type", "work_location" => "Work location", "salary_range" => "Salary range", "candidate_name" => "Name of the candidate", "post_date" => "Date of posting"],
        ["job_listings" => "Matching jobs", "company_name" => "Company name", "application_id" => "Application identifier", "status" => "Application status"]),
    domain!("shopping", ["product_order", "price_alert", "gift_card"],
        ["product_id" => "Product identifier", "quantity" => "Number of items", "store_name" => "Store name", "shipping_address" => "Shipping address", "max_price" => "Maximum price", "coupon_code" => "Coupon code"],
        ["order_status" => "Order status", "lowest_price" => "Lowest price found", "tracking_number" => "Tracking number"]),
    domain!("education", ["course_enrollment", "tutoring_session", "exam_registration"],
        ["course_code" => "Course code", "student_name" => "Name of the student", "semester" => "Semester", "subject" => "Subject area", "session_date" => "Date of the session", "campus" => "Campus name"],
        ["enrollment_status" => "Enrollment status", "schedule" => "Class schedule", "fee" => "Fee due"]),
    domain!("weather", ["weather_forecast", "storm_alert", "air_quality_report"],
        ["city" => "City name", "country" => "Country name", "forecast_date" => "Date of the forecast", "units" => "Measurement units", "alert_level" => "Minimum alert level"],
        ["forecast" => "Forecast summary", "temperature" => "Temperature", "alerts" => "Active alerts", "aqi" => "Air quality index"]),
    domain!("entertainment", ["movie_ticket", "concert_pass", "streaming_plan"],
        ["title" => "Title of the show", "theater_name" => "Name of the theater", "show_time" => "Show time", "seat_count" => "Number of seats", "plan_tier" => "Subscription tier"],
        ["tickets" => "Issued tickets", "status" => "Purchase status", "total_price" => "Total price", "seat_map" => "Seat assignments"]),
    domain!("sports", ["tennis_court", "gym_membership", "match_score"],
        ["facility_name" => "Facility name", "sport" => "Sport type", "session_time" => "Session time", "member_id" => "Member identifier", "team_name" => "Team name"],
        ["status" => "Reservation status", "score" => "Match score", "membership_level" => "Membership level"]),
    domain!("logistics", ["parcel_shipment", "freight_quote", "warehouse_slot"],
        ["tracking_code" => "Tracking code", "origin" => "Origin address", "destination" => "Destination address", "weight_kg" => "Weight in kilograms", "carrier" => "Carrier name", "pickup_date" => "Pickup date"],
        ["shipment_status" => "Shipment status", "quote" => "Price quote", "eta" => "Estimated arrival"]),
    domain!("automotive", ["vehicle_service", "parking_permit", "ev_charging"],
        ["license_plate" => "License plate", "vehicle_model" => "Vehicle model", "service_type" => "Service type", "station_name" => "Charging station name", "permit_zone" => "Permit zone"],
        ["status" => "Request status", "slot" => "Assigned slot", "charge_cost" => "Charging cost", "permit_id" => "Permit identifier"]),
    domain!("pets", ["vet_visit", "pet_grooming", "pet_adoption"],
        ["pet_name" => "Name of the pet", "species" => "Species", "breed" => "Breed", "owner_name" => "Name of the owner", "visit_reason" => "Reason for the visit"],
        ["status" => "Booking status", "visit_id" => "Visit identifier", "care_notes" => "Care notes"]),
    domain!("government", ["passport_renewal", "tax_filing", "permit_application"],
        ["applicant_name" => "Name of the applicant", "document_number" => "Document number", "tax_year" => "Tax year", "office_location" => "Office location", "application_type" => "Application type"],
        ["application_status" => "Application status", "reference_number" => "Reference number", "fee" => "Fee due"]),
    domain!("telecom", ["mobile_plan", "internet_outage", "device_upgrade"],
        ["phone_number" => "Phone number", "plan_name" => "Plan name", "device_model" => "Device model", "service_area" => "Service area", "data_limit" => "Data allowance"],
        ["status" => "Request status", "ticket_id" => "Support ticket", "monthly_cost" => "Monthly cost", "outage_eta" => "Expected restoration"]),
    domain!("energy", ["utility_bill", "solar_quote", "meter_reading"],
        ["meter_id" => "Meter identifier", "billing_period" => "Billing period", "service_address" => "Service address", "roof_area" => "Roof area", "provider" => "Energy provider"],
        ["amount_due" => "Amount due", "usage_kwh" => "Usage in kWh", "quote" => "Installation quote"]),
    domain!("media", ["news_digest", "podcast_episode", "photo_album"],
        ["topic" => "Topic of interest", "source_name" => "Publication or channel", "language" => "Language", "episode_title" => "Episode title", "album_name" => "Album name"],
        ["articles" => "Matching articles", "episodes" => "Matching episodes", "share_link" => "Shareable link", "status" => "Operation status"]),
    domain!("legal", ["contract_review", "notary_appointment", "trademark_search"],
        ["document_title" => "Document title", "party_name" => "Name of the party", "jurisdiction" => "Jurisdiction", "trademark_term" => "Trademark term", "deadline" => "Deadline"],
        ["review_summary" => "Review summary", "matches" => "Matching trademarks", "status" => "Request status"]),
    domain!("fitness", ["workout_plan", "nutrition_log", "yoga_class"],
        ["goal" => "Fitness goal", "trainer_name" => "Name of the trainer", "class_time" => "Class time", "calorie_target" => "Daily calorie target", "studio_name" => "Studio name"],
        ["plan" => "Generated plan", "status" => "Booking status", "progress" => "Progress summary"]),
];

const VALUE_WORDS: [&str; 12] = [
    "riverside", "northgate", "lakeview", "crescent", "pinecrest", "harborview", "sunset",
    "oakridge", "bayside", "hillcrest", "redwood", "silverton",
];

fn camel(snake: &str) -> String {
    let mut out = String::new();
    for (i, part) in snake.split('_').enumerate() {
        if i == 0 {
            out.push_str(part);
        } else {
            let mut chars = part.chars();
            if let Some(c) = chars.next() {
                out.extend(c.to_uppercase());
                out.push_str(chars.as_str());
            }
        }
    }
    out
}

fn value_for(param: &str, rng: &mut ChaCha8Rng) -> String {
    const CODE: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZ0123456789";
    if param.ends_with("date") || param == "deadline" {
        return format!(
            "2025-{:02}-{:02}",
            rng.random_range(1..=12),
            rng.random_range(1..=28)
        );
    }
    if param.ends_with("time") {
        return format!("{}:{:02}", rng.random_range(7..=21), rng.random_range(0..4) * 15);
    }
    match rng.random_range(0..3) {
        0 => (0..6).map(|_| CODE[rng.random_range(0..CODE.len())] as char).collect(),
        1 => format!("{} {}", VALUE_WORDS.choose(rng).unwrap(), rng.random_range(2..500)),
        _ => VALUE_WORDS.choose(rng).unwrap().to_string(),
    }
}

/// `n` seed pairs spread over [`DOMAINS`], with unique tool names. The same
/// `(n, seed)` always yields the same corpus.
pub fn mock_seed_corpus(n: usize, seed: u64) -> Vec<SeedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combos: Vec<(usize, usize, usize)> = (0..DOMAINS.len())
        .flat_map(|d| (0..3).flat_map(move |o| (0..ACTIONS.len()).map(move |a| (d, o, a))))
        .collect();
    combos.shuffle(&mut rng);

    (0..n)
        .map(|i| {
            let (d, o, a) = combos[i % combos.len()];
            let domain = &DOMAINS[d];
            let object = domain.objects[o];
            let (verb, phrase) = ACTIONS[a];
            let round = i / combos.len();
            let name = match round {
                0 => format!("{verb}_{object}"),
                r => format!("{verb}_{object}_v{}", r + 1),
            };
            let use_camel = rng.random_bool(0.3);
            let object_words = object.replace('_', " ");

            let mut picked: Vec<usize> = (0..domain.params.len()).collect();
            picked.shuffle(&mut rng);
            picked.truncate(rng.random_range(2..=domain.params.len().min(5)));
            picked.sort_unstable();
            let mut tool = ToolSpec::new(&name, format!("{phrase} a {object_words}"));
            let mut mentions = Vec::new();
            for (j, &p) in picked.iter().enumerate() {
                let (pname, pdesc) = domain.params[p];
                let ident = if use_camel { camel(pname) } else { pname.to_string() };
                let optional = j > 0 && j == picked.len() - 1 && rng.random_bool(0.4);
                let spec = ParameterSpec::new(ident, pdesc);
                tool = tool.param(if optional { spec.optional() } else { spec });
                if !optional || rng.random_bool(0.5) {
                    mentions.push(format!(
                        "the {} is \"{}\"",
                        pname.replace('_', " "),
                        value_for(pname, &mut rng)
                    ));
                }
            }
            let mut rets: Vec<usize> = (0..domain.returns.len()).collect();
            rets.shuffle(&mut rng);
            rets.truncate(rng.random_range(2..=domain.returns.len().min(3)));
            rets.sort_unstable();
            for r in rets {
                let (rname, rdesc) = domain.returns[r];
                tool = tool.returns(if use_camel { camel(rname) } else { rname.to_string() }, rdesc);
            }

            let last = mentions.pop().unwrap_or_default();
            let details = if mentions.is_empty() {
                last
            } else {
                format!("{} and {last}", mentions.join(", "))
            };
            let query = format!(
                "{} {} {object_words} for me where {details}.",
                ["Please", "I want to", "Could you"][rng.random_range(0..3)],
                phrase.to_lowercase()
            );
            SeedPair {
                query,
                gold_tool: tool,
                domain_tag: domain.tag.to_string(),
            }
        })
        .collect()
}
